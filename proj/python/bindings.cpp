#include <fstream>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wikiseo/adversary/attack.hpp"
#include "wikiseo/adversary/mgda.hpp"
#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/article.hpp"
#include "wikiseo/corpus/synth.hpp"
#include "wikiseo/eval/config.hpp"
#include "wikiseo/eval/metrics.hpp"
#include "wikiseo/eval/pipeline.hpp"
#include "wikiseo/target/bm25.hpp"

namespace py = pybind11;
using namespace wikiseo;

namespace {

std::vector<adversary::Revision> load_revisions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("revision log not found: " + path);
  return adversary::read_revisions(in);
}

eval::ExperimentConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return eval::read_config(is);
}

py::dict metrics_dict(const eval::MetricsReport& m) {
  py::dict d;
  d["count"] = m.count;
  d["rank_boosting_rate"] = m.rank_boosting_rate;
  d["evasion_rate"] = m.evasion_rate;
  d["topic_relevancy_rate"] = m.topic_relevancy_rate;
  d["semantic_consistency_rate"] = m.semantic_consistency_rate;
  d["promotion_success_rate"] = m.promotion_success_rate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wiki search-promotion attack and defense toolkit";

  auto base = py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_ValueError);
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", PyExc_FileNotFoundError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<LookupError>(m, "LookupError", PyExc_KeyError);
  (void)base;

  py::class_<corpus::Corpus>(m, "Corpus")
      .def("__len__", &corpus::Corpus::size)
      .def("article_ids",
           [](const corpus::Corpus& c) {
             std::vector<std::string> ids;
             for (const auto& a : c.articles()) ids.push_back(a.id);
             return ids;
           })
      .def("paragraphs",
           [](const corpus::Corpus& c, const std::string& id) {
             std::vector<std::string> out;
             for (const auto& p : c.at(id).paragraphs) out.push_back(p.text());
             return out;
           })
      .def("save", [](const corpus::Corpus& c, const std::string& path) { corpus::save_corpus(c, path); })
      .def("fingerprint", &eval::corpus_fingerprint);

  m.def("synth_corpus",
        [](std::uint64_t seed, int articles) { return corpus::synth_corpus(seed, articles, corpus::build_vocabulary()); },
        py::arg("seed"), py::arg("articles"));
  m.def("load_corpus", [](const std::string& path) { return corpus::load_corpus(path); });
  m.def("synth_queries",
        [](int n, std::uint64_t seed) { return corpus::synth_queries(corpus::build_vocabulary(), n, seed); },
        py::arg("n"), py::arg("seed"));

  py::class_<target::SearchIndex>(m, "SearchIndex")
      .def_static("build", [](const corpus::Corpus& c) { return target::SearchIndex::build(c); })
      .def("__len__", &target::SearchIndex::size)
      .def("search",
           [](const target::SearchIndex& idx, const std::string& q, std::size_t k) {
             std::vector<std::tuple<std::string, double, int>> out;
             for (const auto& r : idx.search(q, k)) out.emplace_back(r.article_id, r.score, r.rank);
             return out;
           },
           py::arg("query"), py::arg("k"))
      .def("score", [](const target::SearchIndex& idx, const std::string& q, const std::string& id) {
        return idx.score(q, id);
      });

  m.def("mgda_weights",
        [](const std::vector<Eigen::VectorXd>& grads) {
          const auto r = adversary::mgda_weights(grads);
          return py::make_tuple(r.weights, r.objective);
        },
        "Min-norm simplex weights and the squared norm they reach.");

  m.def("keyword_density", &eval::keyword_density, py::arg("phrase_tokens"), py::arg("repetitions"),
        py::arg("article_tokens"));
  m.def("keyword_stuff",
        [](const std::string& text, const std::string& query, double d, std::size_t tokens, std::uint64_t seed) {
          const auto s = eval::keyword_stuff(corpus::Paragraph(text), query, d, tokens, seed);
          return py::make_tuple(s.paragraph.text(), s.repetitions, s.density);
        },
        py::arg("text"), py::arg("query"), py::arg("density"), py::arg("article_tokens"), py::arg("seed"));
  m.def("estimate_revenue", [](double views, double rate, double per_action) {
    return eval::estimate_revenue(views, rate, per_action).revenue;
  });
  m.def("compute_metrics",
        [](const std::string& path, double topic, double consistency) {
          return metrics_dict(eval::compute_metrics(load_revisions(path), {topic, consistency}));
        },
        py::arg("revision_log"), py::arg("topic"), py::arg("consistency"));

  m.def("stage_names", &eval::stage_names);
  m.def("default_config", [] { return eval::config_json({}); });
  m.def("normalize_config", [](const std::string& text) { return eval::config_json(parse_config(text)); });
  m.def("run_stages",
        [](const std::vector<std::string>& stages, const std::string& run_dir, const std::string& config) {
          eval::Pipeline p(config.empty() ? eval::ExperimentConfig{} : parse_config(config), run_dir);
          py::gil_scoped_release release;
          for (const auto& s : stages) p.run(s);
        },
        py::arg("stages"), py::arg("run_dir"), py::arg("config") = "");
}
