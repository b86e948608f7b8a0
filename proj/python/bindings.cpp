#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "webqa/answer.hpp"
#include "webqa/corpus.hpp"
#include "webqa/errors.hpp"
#include "webqa/generator.hpp"
#include "webqa/oracles.hpp"
#include "webqa/text.hpp"
#include "webqa/trainer.hpp"

namespace py = pybind11;
using namespace webqa;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
using Json = std::string;

Json environment_summary(const std::string& path) {
  const auto env = Environment::load(path);
  nlohmann::json links = nlohmann::json::array();
  for (const auto& [pair, l] : env.best_links())
    links.push_back({{"source", pair.first},
                     {"target", pair.second},
                     {"arrow", l.arrow_id},
                     {"link_score", l.link_score},
                     {"path_score", l.path_score}});
  return nlohmann::json{{"labels", env.labels()},
                        {"text_to_blob", env.text_to_blob()},
                        {"best_links", links},
                        {"warnings", env.warnings()}}
      .dump();
}

Json logical_form_info(const std::string& text) {
  const auto e = lf::parse(text);
  nlohmann::json j = {{"sexpr", lf::to_sexpr(e)},
                      {"lambda", lf::to_lambda_notation(e)},
                      {"canonical", lf::canonical(e)},
                      {"well_typed", lf::well_typed(e)}};
  if (lf::well_typed(e)) j["type"] = lf::type_to_string(lf::infer_type(e));
  return j.dump();
}

Json parse_question(const std::string& question, const std::string& lexicon_text, std::size_t lf_count) {
  const auto lex = ccg::Lexicon::parse(lexicon_text);
  ccg::ParserConfig cfg;
  cfg.lf_count = lf_count;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : ccg::parse(text::tokenize(question), lex, nullptr, Weights{}, cfg))
    out.push_back({{"logical_form", lf::to_lambda_notation(p.logical_form)},
                   {"canonical", p.canonical},
                   {"log_weight", p.log_weight},
                   {"trees", p.num_trees}});
  return out.dump();
}

std::optional<std::size_t> select_entities(const std::vector<std::string>& entities,
                                           const std::vector<std::string>& options) {
  return answer::select(exec::Denotation::entity_set(entities), options);
}

std::size_t generate(const std::string& out_dir, const Json& spec_json) {
  const auto spec = gen::SyntheticSpec::from_json(nlohmann::json::parse(spec_json));
  spec.validate();
  const auto c = gen::generate(spec);
  c.save(out_dir);
  return c.train.size() + c.test.size();
}

train::TrainConfig config_from(int epochs, double lr, std::uint64_t seed, bool global_features, bool gold_lf) {
  train::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  cfg.inference.features.predicate_features = global_features;
  cfg.inference.features.denotation_features = global_features;
  cfg.inference.gold_logical_forms = gold_lf;
  return cfg;
}

Json train_model(const std::string& corpus_dir, const std::string& model_path, int epochs, double lr,
                 std::uint64_t seed, bool global_features, bool gold_lf) {
  const auto data = corpus::Dataset::load(corpus_dir);
  train::Workspace ws(data.lexicon());
  nlohmann::json metrics = nlohmann::json::array();
  py::gil_scoped_release release;
  auto m = train::train(ws, data.train(), config_from(epochs, lr, seed, global_features, gold_lf), {},
                        [&](const train::EpochMetrics& em) { metrics.push_back(em.to_json()); });
  m.save(model_path);
  return metrics.dump();
}

Json evaluate_model(const std::string& corpus_dir, const std::string& model_path, const std::string& split) {
  const auto data = corpus::Dataset::load(corpus_dir);
  const auto m = train::Model::load(model_path);
  if (split != "train" && split != "test") throw Error("split must be train or test");
  const auto& examples = split == "train" ? data.train() : data.test();
  train::Workspace ws(data.lexicon());
  py::gil_scoped_release release;
  const auto e = train::evaluate(ws, examples, m, m.config.inference);
  nlohmann::json preds = nlohmann::json::array();
  for (std::size_t i = 0; i < examples.size(); ++i) preds.push_back(corpus::prediction_record(examples[i], e.predictions[i]));
  return nlohmann::json{{"accuracy", e.accuracy},
                        {"random_baseline", train::random_baseline_accuracy(examples, m.config.seed)},
                        {"predictions", preds}}
      .dump();
}

Json oracle_checks(std::uint64_t seed) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : oracle::run_checks(seed))
    out.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_webqa, m) {
  m.doc() = "Food-web diagram question answering";

  // Translators registered later are tried first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DanglingIdError>(m, "DanglingIdError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TypeError>(m, "TypeError", PyExc_TypeError);

  m.def("tokenize", &text::tokenize, py::arg("text"));
  m.def("environment_summary", &environment_summary, py::arg("path"));
  m.def("logical_form_info", &logical_form_info, py::arg("text"));
  m.def("parse_question", &parse_question, py::arg("question"), py::arg("lexicon"), py::arg("lf_count") = 10);
  m.def("select_entities", &select_entities, py::arg("entities"), py::arg("options"));
  m.def("generate", &generate, py::arg("out_dir"), py::arg("spec"));
  m.def("train", &train_model, py::arg("corpus"), py::arg("model"), py::arg("epochs"), py::arg("lr"),
        py::arg("seed"), py::arg("global_features"), py::arg("gold_lf"));
  m.def("evaluate", &evaluate_model, py::arg("corpus"), py::arg("model"), py::arg("split"));
  m.def("oracle_checks", &oracle_checks, py::arg("seed"));
}
