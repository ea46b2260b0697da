#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wikiseo/common/format.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/nn/tape.hpp"

namespace wikiseo::nn {

/// Owns the parameters of one model. Addresses are stable for the store's
/// lifetime, so layers keep raw Parameter pointers into it.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Xavier-uniform initialised matrix; pass scale 0 for zeros.
  Parameter& add(std::string name, Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0);

  Parameter& get(std::string_view name);
  const std::vector<std::unique_ptr<Parameter>>& all() const { return params_; }

  void zero_grad();
  std::size_t count() const;

  Vec flat_values() const;
  Vec flat_grads() const;
  void set_flat_values(const Vec& flat);

  /// Text dump: header with `kind`, one-line JSON config, then each tensor
  /// with its name and shape followed by row-major values.
  void save(std::ostream& os, std::string_view kind, std::string_view config_json) const;
  /// Reads a dump written by save(); returns the config line. Shapes must match.
  std::string load(std::istream& is, std::string_view kind);
  /// Reads just the config line of a dump, leaving the stream after it.
  static std::string read_config(std::istream& is, std::string_view kind);
  void load_tensors(std::istream& is);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

using wikiseo::format_double;

}  // namespace wikiseo::nn
