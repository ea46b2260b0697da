#include "wikiseo/nn/params.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "wikiseo/common/error.hpp"

namespace wikiseo::nn {

Parameter& ParameterStore::add(std::string name, Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale) {
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->value.resize(rows, cols);
  const double limit = scale * std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (Eigen::Index i = 0; i < p->value.size(); ++i) {
    p->value(i) = limit == 0.0 ? 0.0 : rng.uniform(-limit, limit);
  }
  p->grad = Mat::Zero(rows, cols);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return *p;
  }
  throw LookupError("no parameter named " + std::string(name));
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero(p->value.rows(), p->value.cols());
}

std::size_t ParameterStore::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

Vec ParameterStore::flat_values() const {
  Vec out(static_cast<Eigen::Index>(count()));
  Eigen::Index off = 0;
  for (const auto& p : params_) {
    out.segment(off, p->value.size()) = Eigen::Map<const Vec>(p->value.data(), p->value.size());
    off += p->value.size();
  }
  return out;
}

Vec ParameterStore::flat_grads() const {
  Vec out(static_cast<Eigen::Index>(count()));
  Eigen::Index off = 0;
  for (const auto& p : params_) {
    if (p->grad.size() == p->value.size()) {
      out.segment(off, p->value.size()) = Eigen::Map<const Vec>(p->grad.data(), p->grad.size());
    } else {
      out.segment(off, p->value.size()).setZero();
    }
    off += p->value.size();
  }
  return out;
}

void ParameterStore::set_flat_values(const Vec& flat) {
  require(flat.size() == static_cast<Eigen::Index>(count()), "set_flat_values: size mismatch");
  Eigen::Index off = 0;
  for (auto& p : params_) {
    Eigen::Map<Vec>(p->value.data(), p->value.size()) = flat.segment(off, p->value.size());
    off += p->value.size();
  }
}

void ParameterStore::save(std::ostream& os, std::string_view kind, std::string_view config_json) const {
  os << "wikiseo-params v1 " << kind << '\n' << config_json << '\n' << params_.size() << '\n';
  for (const auto& p : params_) {
    os << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        if (c > 0) os << ' ';
        os << format_double(p->value(r, c));
      }
      os << '\n';
    }
  }
}

std::string ParameterStore::read_config(std::istream& is, std::string_view kind) {
  std::string header;
  std::getline(is, header);
  const std::string expected = "wikiseo-params v1 " + std::string(kind);
  if (header != expected) throw ParseError("parameter dump: expected header '" + expected + "', got '" + header + "'");
  std::string config;
  std::getline(is, config);
  return config;
}

void ParameterStore::load_tensors(std::istream& is) {
  std::size_t n = 0;
  if (!(is >> n) || n != params_.size()) throw ParseError("parameter dump: tensor count mismatch");
  for (auto& p : params_) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols)) throw ParseError("parameter dump: truncated manifest");
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw ParseError("parameter dump: shape manifest mismatch at " + name);
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string tok;
        if (!(is >> tok)) throw ParseError("parameter dump: truncated values for " + name);
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc()) throw ParseError("parameter dump: bad number '" + tok + "'");
        p->value(r, c) = v;
      }
    }
    p->grad.setZero(rows, cols);
  }
}

std::string ParameterStore::load(std::istream& is, std::string_view kind) {
  std::string config = read_config(is, kind);
  load_tensors(is);
  return config;
}

}  // namespace wikiseo::nn
