// webqa: train, evaluate and query the food-web question answering model.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "webqa/corpus.hpp"
#include "webqa/errors.hpp"
#include "webqa/generator.hpp"
#include "webqa/oracles.hpp"
#include "webqa/text.hpp"
#include "webqa/trainer.hpp"

using namespace webqa;

namespace {

struct InferenceFlags {
  std::size_t parser_beam = 100;
  std::size_t lf_count = 10;
  std::size_t exec_beam = 100;
  bool gold_lf = false;
  bool no_predicate = false;
  bool no_denotation = false;

  void add(CLI::App* app) {
    app->add_option("--parser-beam", parser_beam, "Chart entries kept per cell (0 = unbounded)")->capture_default_str();
    app->add_option("--lf-count", lf_count, "Logical forms kept per question (0 = all)")->capture_default_str();
    app->add_option("--exec-beam", exec_beam, "Execution beam width")->capture_default_str();
    app->add_flag("--gold-lf", gold_lf, "Use annotated logical forms instead of the parser");
    app->add_flag("--no-predicate-features", no_predicate, "Disable predicate features");
    app->add_flag("--no-denotation-features", no_denotation, "Disable denotation features");
  }

  train::InferenceConfig config() const {
    train::InferenceConfig c;
    c.parser.beam_width = parser_beam == 0 ? std::numeric_limits<std::size_t>::max() : parser_beam;
    c.parser.lf_count = lf_count;
    c.exec_beam = exec_beam;
    c.gold_logical_forms = gold_lf;
    c.features.predicate_features = !no_predicate;
    c.features.denotation_features = !no_denotation;
    return c;
  }
};

void dump_traces(std::ostream& os, train::Workspace& ws, const train::Example& ex, const train::Model& m,
                 const train::InferenceConfig& cfg) {
  auto inf = train::execute(ws, ex, m, cfg, train::parse_example(ws, ex, m, cfg));
  os << "# " << ex.id << " " << text::join(ex.tokens, " ") << "\n";
  const std::size_t shown = std::min<std::size_t>(inf.candidates.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& c = inf.candidates[i];
    os << "candidate " << i << " score=" << c.score << " lf=" << inf.parses[c.parse].canonical
       << " denotation=" << c.execution.denotation.to_string() << "\n";
    exec::dump_trace(c.execution, os);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Food-web diagram question answering"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus");
  std::string gen_out, gen_spec;
  gen::SyntheticSpec spec;
  gen->add_option("--out", gen_out, "Output corpus directory")->required();
  gen->add_option("--spec", gen_spec, "JSON file with generator settings")->check(CLI::ExistingFile);
  auto* seed_opt = gen->add_option("--seed", spec.seed, "Random seed");
  auto* train_webs_opt = gen->add_option("--train-webs", spec.train_webs, "Training webs");
  auto* test_webs_opt = gen->add_option("--test-webs", spec.test_webs, "Test webs");
  auto* qpw_opt = gen->add_option("--questions-per-web", spec.questions_per_web, "Questions per web");
  auto* spurious_opt = gen->add_option("--spurious-rate", spec.spurious_rate, "Spurious linkages per true linkage");
  auto* noise_opt = gen->add_option("--score-noise", spec.score_noise, "Vision score noise scale");
  auto* dropped_opt = gen->add_option("--dropped-rate", spec.dropped_rate, "Dropped linkage rate");

  // train
  auto* tr = app.add_subcommand("train", "Train a model");
  std::string corpus_dir, model_path, lexicon_path, metrics_path, traces_path;
  InferenceFlags train_flags;
  train::TrainConfig tc;
  tr->add_option("--corpus", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--model", model_path, "Output model file")->required();
  tr->add_option("--lexicon", lexicon_path, "Lexicon file (default: the corpus lexicon)")->check(CLI::ExistingFile);
  tr->add_option("--epochs", tc.epochs, "Epochs")->capture_default_str();
  tr->add_option("--lr", tc.learning_rate, "Learning rate")->capture_default_str();
  tr->add_flag("--decay", tc.decay, "Decay the learning rate as 1/sqrt(t)");
  tr->add_option("--l2", tc.l2, "L2 regularization strength")->capture_default_str();
  tr->add_option("--seed", tc.seed, "Shuffling seed")->capture_default_str();
  tr->add_option("--metrics", metrics_path, "Per-epoch metrics (JSON lines); default stderr");
  bool heldout = false;
  tr->add_flag("--heldout", heldout, "Report test-split accuracy after every epoch");
  train_flags.add(tr);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Answer accuracy on a corpus split");
  std::string split = "test", predictions_path, baseline;
  std::uint64_t eval_seed = 1;
  InferenceFlags eval_flags;
  bool eval_flags_given = false;
  ev->add_option("--corpus", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--model", model_path, "Model file")->check(CLI::ExistingFile);
  ev->add_option("--lexicon", lexicon_path, "Lexicon file (default: the corpus lexicon)")->check(CLI::ExistingFile);
  ev->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}))->capture_default_str();
  ev->add_option("--predictions", predictions_path, "Per-question prediction dump (JSON lines)");
  ev->add_option("--baseline", baseline, "Evaluate a baseline instead of a model")->check(CLI::IsMember({"random"}));
  ev->add_option("--seed", eval_seed, "Seed for the random baseline")->capture_default_str();
  ev->add_option("--dump-traces", traces_path, "Write execution traces of the top candidates");
  ev->add_flag("--override-inference", eval_flags_given, "Use the inference flags below instead of the model's");
  eval_flags.add(ev);

  // predict
  auto* pr = app.add_subcommand("predict", "Answer distribution for one question");
  std::string env_path, question;
  std::vector<std::string> options;
  InferenceFlags predict_flags;
  bool predict_flags_given = false;
  pr->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  pr->add_option("--lexicon", lexicon_path, "Lexicon file")->required()->check(CLI::ExistingFile);
  pr->add_option("--env", env_path, "Environment file")->required()->check(CLI::ExistingFile);
  pr->add_option("--question", question, "Question text")->required();
  pr->add_option("--options", options, "Answer options")->required()->expected(2, 26);
  pr->add_option("--dump-traces", traces_path, "Write execution traces of the top candidates");
  pr->add_flag("--override-inference", predict_flags_given, "Use the inference flags below instead of the model's");
  predict_flags.add(pr);

  // oracle-check
  auto* oc = app.add_subcommand("oracle-check", "Compare fast inference against exhaustive oracles");
  std::uint64_t oracle_seed = 11;
  oc->add_option("--seed", oracle_seed, "Fixture seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (!gen_spec.empty()) {
        std::ifstream in(gen_spec);
        auto base = gen::SyntheticSpec::from_json(nlohmann::json::parse(in));
        // Command-line flags override the file.
        if (!seed_opt->count()) spec.seed = base.seed;
        if (!train_webs_opt->count()) spec.train_webs = base.train_webs;
        if (!test_webs_opt->count()) spec.test_webs = base.test_webs;
        if (!qpw_opt->count()) spec.questions_per_web = base.questions_per_web;
        if (!spurious_opt->count()) spec.spurious_rate = base.spurious_rate;
        if (!noise_opt->count()) spec.score_noise = base.score_noise;
        if (!dropped_opt->count()) spec.dropped_rate = base.dropped_rate;
        spec.min_organisms = base.min_organisms;
        spec.max_organisms = base.max_organisms;
        spec.edge_density = base.edge_density;
        spec.acyclic_probability = base.acyclic_probability;
        spec.distractor_text_rate = base.distractor_text_rate;
        spec.template_mix = base.template_mix;
      }
      auto c = gen::generate(spec);
      c.save(gen_out);
      std::printf("wrote %zu train and %zu test questions to %s\n", c.train.size(), c.test.size(), gen_out.c_str());
      return 0;
    }

    if (tr->parsed()) {
      auto data = corpus::Dataset::load(corpus_dir);
      ccg::Lexicon lex = lexicon_path.empty() ? ccg::Lexicon{} : ccg::Lexicon::load(lexicon_path);
      train::Workspace ws(lexicon_path.empty() ? data.lexicon() : lex);
      tc.inference = train_flags.config();
      std::ofstream metrics_file;
      if (!metrics_path.empty()) metrics_file.open(metrics_path);
      std::ostream& metrics = metrics_path.empty() ? std::cerr : metrics_file;
      const std::vector<train::Example> none;
      auto m = train::train(ws, data.train(), tc, heldout ? data.test() : none, [&](const train::EpochMetrics& em) {
        metrics << em.to_json().dump() << std::endl;
      });
      m.save(model_path);
      return 0;
    }

    if (ev->parsed()) {
      auto data = corpus::Dataset::load(corpus_dir);
      const auto& examples = split == "train" ? data.train() : data.test();
      if (baseline == "random") {
        std::printf("accuracy %.4f (%zu questions, random baseline)\n",
                    train::random_baseline_accuracy(examples, eval_seed), examples.size());
        return 0;
      }
      if (model_path.empty()) throw Error("evaluate needs --model or --baseline");
      auto m = train::Model::load(model_path);
      ccg::Lexicon lex = lexicon_path.empty() ? ccg::Lexicon{} : ccg::Lexicon::load(lexicon_path);
      train::Workspace ws(lexicon_path.empty() ? data.lexicon() : lex);
      const auto cfg = eval_flags_given ? eval_flags.config() : m.config.inference;
      auto result = train::evaluate(ws, examples, m, cfg);
      if (!predictions_path.empty()) {
        std::ofstream out(predictions_path);
        for (std::size_t i = 0; i < examples.size(); ++i) {
          out << corpus::prediction_record(examples[i], result.predictions[i]).dump() << "\n";
        }
      }
      if (!traces_path.empty()) {
        std::ofstream out(traces_path);
        for (const auto& ex : examples) dump_traces(out, ws, ex, m, cfg);
      }
      std::printf("accuracy %.4f (%zu questions)\n", result.accuracy, examples.size());
      return 0;
    }

    if (pr->parsed()) {
      auto m = train::Model::load(model_path);
      auto lex = ccg::Lexicon::load(lexicon_path);
      auto env = Environment::load(env_path);
      train::Workspace ws(lex);
      train::Example ex;
      ex.id = "question";
      ex.tokens = text::tokenize(question);
      ex.env = &env;
      ex.options = options;
      const auto cfg = predict_flags_given ? predict_flags.config() : m.config.inference;
      auto p = train::predict(ws, ex, m, cfg);
      for (std::size_t i = 0; i < options.size(); ++i) {
        std::printf("%s %.6f %s\n", corpus::answer_letter(i).c_str(), p.distribution[i], options[i].c_str());
      }
      std::printf("answer %s\n", corpus::answer_letter(p.choice).c_str());
      if (!traces_path.empty()) {
        std::ofstream out(traces_path);
        dump_traces(out, ws, ex, m, cfg);
      }
      return 0;
    }

    if (oc->parsed()) {
      bool ok = true;
      for (const auto& r : oracle::run_checks(oracle_seed)) {
        std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "webqa: %s\n", e.what());
    return 1;
  }
  return 0;
}
