#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "clickstream/corpus.hpp"
#include "clickstream/errors.hpp"
#include "clickstream/evaluation.hpp"
#include "clickstream/ingest.hpp"
#include "clickstream/neural/gradcheck.hpp"
#include "clickstream/session_io.hpp"
#include "clickstream/synthgen.hpp"

namespace clickstream::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kGradTolerance = 1e-4;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void echo_config(std::ostream& out, const std::string& command, const json& config) {
  out << "# " << command << ' ' << config.dump() << '\n';
}

Corpus read_corpus(const fs::path& dir) {
  Corpus c;
  c.train = read_sessions_file(dir / "train.txt");
  c.validation = read_sessions_file(dir / "validation.txt");
  c.test = read_sessions_file(dir / "test.txt");
  for (auto* split : {&c.train, &c.validation, &c.test}) {
    for (const auto& s : *split) {
      if (!s.label) throw FormatError("corpus session '" + s.id + "' has no label");
    }
  }
  return c;
}

std::string matrix_csv(const TransitionMatrix& m, const std::array<bool, kNumEventTypes>* empty) {
  std::ostringstream out;
  out << std::setprecision(17) << "from";
  for (auto e : kAllEventTypes) out << ',' << name(e);
  if (empty) out << ",empty";
  out << '\n';
  for (int r = 0; r < kNumEventTypes; ++r) {
    out << name(kAllEventTypes[r]);
    for (int c = 0; c < kNumEventTypes; ++c) out << ',' << m(r, c);
    if (empty) out << ',' << ((*empty)[r] ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

std::string events_csv(const CorpusStats& st) {
  std::ostringstream out;
  out << std::setprecision(17) << "event,code,all_count,all_freq";
  if (st.buy) out << ",buy_count,buy_freq";
  if (st.nobuy) out << ",nobuy_count,nobuy_freq";
  out << '\n';
  for (int i = 0; i < kNumEventTypes; ++i) {
    out << name(kAllEventTypes[i]) << ',' << code(kAllEventTypes[i]) << ','
        << st.all.event_counts(i) << ',' << st.all.event_freq(i);
    if (st.buy) out << ',' << st.buy->event_counts(i) << ',' << st.buy->event_freq(i);
    if (st.nobuy) out << ',' << st.nobuy->event_counts(i) << ',' << st.nobuy->event_freq(i);
    out << '\n';
  }
  return out.str();
}

json counts_json(const ClassCounts& c) { return {{"BUY", c.buy}, {"NOBUY", c.nobuy}}; }

json train_log_json(const nn::TrainLog& log) {
  json epochs = json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_accuracy", e.val_accuracy},
                      {"improved", e.improved}});
  }
  return {{"best_epoch", log.best_epoch},
          {"best_val_accuracy", log.best_val_accuracy},
          {"stopped_early", log.stopped_early},
          {"epochs", std::move(epochs)}};
}

/// Hyperparameter flags shared by train, evaluate and sweep.
struct ModelFlags {
  std::string model;
  int ngram = 5;
  int order = 5;
  double alpha = 1.0;
  int alphabet = kNumEventTypes;
  std::optional<int> hidden;
  std::optional<double> lr;
  std::optional<int> batch;
  std::string pooling = "last";
  int patience = 10;
  int max_epochs = 50;

  void add(CLI::App& app, bool require_model) {
    auto* m = app.add_option("--model", model, "Model family")
                  ->check(CLI::IsMember({"nb", "mc", "lm", "s2l"}));
    if (require_model) m->required();
    app.add_option("--n", ngram, "n-gram length (nb)")->capture_default_str();
    app.add_option("--order", order, "Markov chain order (mc)")->capture_default_str();
    app.add_option("--alpha", alpha, "Additive smoothing (nb, mc)")->capture_default_str();
    app.add_option("--alphabet", alphabet, "Smoothing alphabet size (mc)")->capture_default_str();
    app.add_option("--hidden", hidden, "LSTM hidden units");
    app.add_option("--lr", lr, "Adam learning rate");
    app.add_option("--batch", batch, "Minibatch size");
    app.add_option("--pooling", pooling, "Seq2Label pooling")
        ->check(CLI::IsMember({"last", "avg"}))
        ->capture_default_str();
    app.add_option("--patience", patience, "Early-stopping patience")->capture_default_str();
    app.add_option("--max-epochs", max_epochs, "Epoch cap")->capture_default_str();
  }

  ModelSpec spec() const {
    const auto kind = parse_model_kind(model);
    ModelSpec s = default_model_spec(kind, nn::parse_pooling(pooling));
    s.order = kind == ModelKind::NB ? ngram : order;
    s.alpha = alpha;
    s.alphabet = alphabet;
    if (hidden) s.neural.hidden = *hidden;
    if (lr) s.neural.lr = *lr;
    if (batch) s.neural.batch = *batch;
    s.neural.early_stop = {patience, max_epochs};
    return s;
  }
};

// --- subcommands -----------------------------------------------------------

struct SessionizeArgs {
  std::string input, output, format = "tsv";
  std::int64_t gap_ms = 1'800'000;
  bool given = false;
};

int cmd_sessionize(const SessionizeArgs& a, std::ostream& out, std::ostream& err) {
  json config = {{"input", a.input},   {"output", a.output},
                 {"format", a.format}, {"gap_ms", a.gap_ms},
                 {"use_given_sessions", a.given}};
  echo_config(out, "sessionize", config);
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw FormatError("cannot open " + a.input);
  const auto parsed = parse_raw_log(in, parse_log_format(a.format));
  for (const auto& e : parsed.errors) err << a.input << ':' << e.line << ": " << e.message << '\n';
  const auto sessions = a.given ? sessions_from_given_ids(parsed.events)
                                : sessionize(parsed.events, SessionizationConfig{a.gap_ms});
  SessionList symbolized;
  symbolized.reserve(sessions.size());
  for (const auto& s : sessions) {
    auto sym = symbolize(s);
    sym.label = label_session(sym);
    symbolized.push_back(std::move(sym));
  }
  write_sessions_file(a.output, symbolized, true);
  const auto counts = count_labels(symbolized);
  out << json{{"events", parsed.events.size()},
              {"skipped_lines", parsed.skipped},
              {"sessions", symbolized.size()},
              {"labels", counts_json(counts)}}
             .dump()
      << '\n';
  return 0;
}

struct PrepareArgs {
  std::string input, output;
  std::size_t min_len = 10, max_len = 200;
  std::uint64_t seed = 0;
};

int cmd_prepare(const PrepareArgs& a, std::ostream& out) {
  PrepConfig cfg;
  cfg.min_len = a.min_len;
  cfg.max_len = a.max_len;
  cfg.seed = a.seed;
  json config = {{"input", a.input},     {"output", a.output},   {"min_len", a.min_len},
                 {"max_len", a.max_len}, {"seed", a.seed},
                 {"split", {cfg.split.train, cfg.split.validation, cfg.split.test}}};
  echo_config(out, "prepare", config);
  auto sessions = read_sessions_file(a.input);
  ensure_labels(sessions);
  const auto corpus = prepare(sessions, cfg);
  const fs::path dir(a.output);
  fs::create_directories(dir);
  write_sessions_file(dir / "train.txt", corpus.train, true);
  write_sessions_file(dir / "validation.txt", corpus.validation, true);
  write_sessions_file(dir / "test.txt", corpus.test, true);
  const auto& log = corpus.prep_log;
  json summary = {
      {"config", config},
      {"prep_log",
       {{"input_total", log.input_total},
        {"dropped_short", log.dropped_short},
        {"dropped_long", log.dropped_long},
        {"cut", log.cut},
        {"dropped_after_cut", log.dropped_after_cut},
        {"downsampled", log.downsampled},
        {"buy_after_filter", log.buy_after_filter},
        {"nobuy_after_filter", log.nobuy_after_filter}}},
      {"splits",
       {{"train", counts_json(corpus.train_counts())},
        {"validation", counts_json(corpus.validation_counts())},
        {"test", counts_json(corpus.test_counts())}}},
      {"total", corpus.train.size() + corpus.validation.size() + corpus.test.size()}};
  write_json(dir / "prep.json", summary);
  out << summary.dump() << '\n';
  return 0;
}

int cmd_stats(const std::string& input, const std::string& output, std::ostream& out) {
  echo_config(out, "stats", {{"input", input}, {"output", output}});
  auto sessions = read_sessions_file(input);
  const auto st = compute_stats(sessions);
  const fs::path dir(output);
  fs::create_directories(dir);
  json j = stats_to_json(st);
  j["config"] = {{"input", input}};
  write_json(dir / "stats.json", j);
  write_text(dir / "events.csv", events_csv(st));
  write_text(dir / "transitions_all.csv", matrix_csv(st.all.transitions, &st.all.empty_rows));
  if (st.buy) write_text(dir / "transitions_buy.csv", matrix_csv(st.buy->transitions, &st.buy->empty_rows));
  if (st.nobuy) {
    write_text(dir / "transitions_nobuy.csv", matrix_csv(st.nobuy->transitions, &st.nobuy->empty_rows));
  }
  if (st.transition_diff) write_text(dir / "transitions_diff.csv", matrix_csv(*st.transition_diff, nullptr));
  const auto& l = st.all.lengths;
  out << json{{"sessions", l.sessions}, {"events", l.events}, {"mean_length", l.mean},
              {"sd_length", l.sd}}
             .dump()
      << '\n';
  return 0;
}

struct GenerateArgs {
  std::string spec, output;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> prior;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GeneratorSpec spec = a.spec.empty() ? default_generator_spec()
                                      : generator_spec_from_json(read_json(a.spec));
  if (a.seed) spec.seed = *a.seed;
  if (a.prior) spec.prior_buy = *a.prior;
  spec.validate();
  echo_config(out, "generate",
              {{"spec", a.spec.empty() ? "built-in" : a.spec},
               {"n", a.n},
               {"seed", spec.seed},
               {"prior_buy", spec.prior_buy},
               {"output", a.output}});
  const auto sessions = generate(spec, a.n);
  write_sessions_file(a.output, sessions, true);
  std::size_t oracle_correct = 0;
  for (const auto& s : sessions) oracle_correct += bayes_oracle(spec, s).predicted() == *s.label;
  json summary = {{"sessions", sessions.size()}, {"labels", counts_json(count_labels(sessions))}};
  if (!sessions.empty()) {
    summary["oracle_accuracy"] =
        static_cast<double>(oracle_correct) / static_cast<double>(sessions.size());
  }
  out << summary.dump() << '\n';
  return 0;
}

struct TrainArgs {
  std::string input, output;
  std::uint64_t seed = 0;
  ModelFlags model;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto spec = a.model.spec();
  json config = to_json(spec);
  config["seed"] = a.seed;
  config["input"] = a.input;
  echo_config(out, "train", config);
  const auto corpus = read_corpus(a.input);
  std::vector<nn::TrainLog> logs;
  const auto model = train_model(spec, corpus, a.seed, &logs);
  json j = to_json(model);
  j["config"] = config;
  if (!logs.empty()) {
    json training = json::array();
    for (const auto& l : logs) training.push_back(train_log_json(l));
    j["training"] = std::move(training);
  }
  write_json(a.output, j);
  json summary = {{"model", model_id(spec)},
                  {"validation_accuracy", evaluate(model, corpus.validation).accuracy}};
  for (std::size_t i = 0; i < logs.size(); ++i) {
    summary["best_epochs"].push_back(logs[i].best_epoch);
  }
  out << summary.dump() << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string input, output, checkpoint;
  std::uint64_t seed = 0;
  int runs = 10;
  bool timing = false;
  ModelFlags model;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  EvalReport report;
  if (!a.checkpoint.empty()) {
    const json ck = read_json(a.checkpoint);
    json config = ck.value("config", json::object());
    config["checkpoint"] = a.checkpoint;
    config["input"] = a.input;
    echo_config(out, "evaluate", config);
    const auto corpus = read_corpus(a.input);
    const auto model = trained_model_from_json(ck);
    RunRecord run;
    run.seed = config.value("seed", std::uint64_t{0});
    run.metrics = evaluate(model, corpus.test);
    const std::string id = config.contains("model")
                               ? model_id(model_spec_from_json(config))
                               : ck.value("kind", std::string("model"));
    report = make_report(id, config, {run});
  } else {
    if (a.model.model.empty()) throw CLI::RequiredError("--model or --checkpoint");
    const auto spec = a.model.spec();
    json config = to_json(spec);
    config["base_seed"] = a.seed;
    config["runs"] = a.runs;
    config["input"] = a.input;
    echo_config(out, "evaluate", config);
    const auto corpus = read_corpus(a.input);
    report = multi_seed_eval(spec, corpus, {a.runs, a.seed, a.timing});
    report.config["input"] = a.input;
  }
  if (!a.output.empty()) write_json(a.output, to_json(report));
  out << format_table(std::span<const EvalReport>(&report, 1));
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double confidence,
                const std::string& output, std::ostream& out) {
  echo_config(out, "compare", {{"a", a_path}, {"b", b_path}, {"confidence", confidence}});
  const auto a = eval_report_from_json(read_json(a_path));
  const auto b = eval_report_from_json(read_json(b_path));
  const auto c = compare(a, b, confidence);
  json j = to_json(c);
  j["a"] = a.model;
  j["b"] = b.model;
  if (!output.empty()) write_json(output, j);
  const EvalReport both[] = {a, b};
  out << format_table(both) << j.dump() << '\n';
  return 0;
}

int cmd_gradcheck(int configurations, std::uint64_t seed, const std::string& output,
                  std::ostream& out) {
  nn::GradCheckSuiteConfig cfg;
  cfg.configurations = configurations;
  cfg.seed = seed;
  echo_config(out, "gradcheck",
              {{"configurations", cfg.configurations},
               {"max_hidden", cfg.max_hidden},
               {"max_steps", cfg.max_steps},
               {"max_batch", cfg.max_batch},
               {"step", cfg.step},
               {"seed", cfg.seed}});
  const auto rep = nn::run_gradcheck_suite(cfg);
  const bool pass = rep.max_rel_error < kGradTolerance;
  json j = {{"configurations", rep.cases.size()},
            {"max_rel_error", rep.max_rel_error},
            {"tolerance", kGradTolerance},
            {"pass", pass}};
  if (!output.empty()) {
    json cases = json::array();
    for (const auto& c : rep.cases) {
      cases.push_back({{"objective", c.objective},
                       {"hidden", c.hidden},
                       {"steps", c.steps},
                       {"batch", c.batch},
                       {"max_rel_error", c.report.max_rel_error}});
    }
    json full = j;
    full["cases"] = std::move(cases);
    write_json(output, full);
  }
  out << j.dump() << '\n';
  return pass ? 0 : 1;
}

struct SweepArgs {
  std::string input, output;
  std::uint64_t seed = 0;
  ModelFlags model;
  std::vector<int> hidden_grid{10, 20, 40, 80};
  std::vector<double> lr_grid{0.01, 0.001};
  std::vector<int> batch_grid{10, 20, 50};
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const auto kind = parse_model_kind(a.model.model);
  if (!is_stochastic(kind)) throw InvalidSpec("sweep covers the neural models (lm, s2l)");
  json config = {{"model", a.model.model},       {"seed", a.seed},
                 {"hidden", a.hidden_grid},      {"lr", a.lr_grid},
                 {"batch", a.batch_grid},        {"patience", a.model.patience},
                 {"max_epochs", a.model.max_epochs}, {"input", a.input}};
  if (kind == ModelKind::S2L) config["pooling"] = a.model.pooling;
  echo_config(out, "sweep", config);
  const auto corpus = read_corpus(a.input);

  struct Point {
    ModelSpec spec;
    double val = 0.0;
    double test = 0.0;
    std::size_t grid_index = 0;
  };
  std::vector<Point> points;
  for (int h : a.hidden_grid) {
    for (double lr : a.lr_grid) {
      for (int b : a.batch_grid) {
        Point p;
        p.spec = a.model.spec();
        p.spec.neural.hidden = h;
        p.spec.neural.lr = lr;
        p.spec.neural.batch = b;
        p.grid_index = points.size();
        const auto model = train_model(p.spec, corpus, a.seed);
        p.val = evaluate(model, corpus.validation).accuracy;
        p.test = evaluate(model, corpus.test).accuracy;
        points.push_back(p);
      }
    }
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const Point& x, const Point& y) { return x.val > y.val; });

  std::ostringstream table;
  table << "rank\thidden\tlr\tbatch\tval_accuracy\ttest_accuracy\n";
  json ranked = json::array();
  for (std::size_t r = 0; r < points.size(); ++r) {
    const auto& p = points[r];
    table << r + 1 << '\t' << p.spec.neural.hidden << '\t' << p.spec.neural.lr << '\t'
          << p.spec.neural.batch << '\t' << std::fixed << std::setprecision(4) << p.val << '\t'
          << p.test << std::defaultfloat << '\n';
    ranked.push_back({{"rank", r + 1},
                      {"hidden", p.spec.neural.hidden},
                      {"lr", p.spec.neural.lr},
                      {"batch", p.spec.neural.batch},
                      {"val_accuracy", p.val},
                      {"test_accuracy", p.test}});
  }
  if (!a.output.empty()) {
    const fs::path dir(a.output);
    fs::create_directories(dir);
    write_json(dir / "sweep.json", {{"config", config}, {"ranked", ranked}});
    write_text(dir / "sweep.tsv", table.str());
  }
  out << table.str();
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clickstream purchase-intent pipeline", "clickstream"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SessionizeArgs sz;
  auto* s_sz = app.add_subcommand("sessionize", "Raw event log -> labeled symbolized sessions");
  s_sz->add_option("--input", sz.input, "Raw log (TSV or JSON lines)")->required();
  s_sz->add_option("--output", sz.output, "Session file")->required();
  s_sz->add_option("--format", sz.format, "Log format")
      ->check(CLI::IsMember({"tsv", "jsonl"}))
      ->capture_default_str();
  s_sz->add_option("--gap-ms", sz.gap_ms, "Inactivity gap that splits sessions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s_sz->add_flag("--use-given-sessions", sz.given, "Group by the log's session_id");

  PrepareArgs pr;
  auto* s_pr = app.add_subcommand("prepare", "Filter, cut, balance and split a session file");
  s_pr->add_option("--input", pr.input, "Session file")->required();
  s_pr->add_option("--output", pr.output, "Corpus directory")->required();
  s_pr->add_option("--min-len", pr.min_len, "Minimum session length")->capture_default_str();
  s_pr->add_option("--max-len", pr.max_len, "Maximum session length")->capture_default_str();
  s_pr->add_option("--seed", pr.seed, "Downsampling and split seed")->capture_default_str();

  std::string st_in, st_out;
  auto* s_st = app.add_subcommand("stats", "Length, event and transition statistics");
  s_st->add_option("--input", st_in, "Session file")->required();
  s_st->add_option("--output", st_out, "Output directory")->required();

  GenerateArgs ge;
  auto* s_ge = app.add_subcommand("generate", "Sample a labeled synthetic corpus");
  s_ge->add_option("--spec", ge.spec, "Generator spec JSON (built-in default if omitted)");
  s_ge->add_option("--n", ge.n, "Number of sessions")->required();
  s_ge->add_option("--seed", ge.seed, "Overrides the spec seed");
  s_ge->add_option("--prior", ge.prior, "Overrides the spec BUY prior")->check(CLI::Range(0.0, 1.0));
  s_ge->add_option("--output", ge.output, "Session file")->required();

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "Train one model on a prepared corpus");
  s_tr->add_option("--input", tr.input, "Corpus directory")->required();
  s_tr->add_option("--output", tr.output, "Model JSON")->required();
  s_tr->add_option("--seed", tr.seed, "Training seed")->capture_default_str();
  tr.model.add(*s_tr, true);

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Multi-seed test evaluation");
  s_ev->add_option("--input", ev.input, "Corpus directory")->required();
  s_ev->add_option("--output", ev.output, "Report JSON");
  s_ev->add_option("--checkpoint", ev.checkpoint, "Evaluate a trained model instead of training");
  s_ev->add_option("--seed", ev.seed, "Base seed; run i uses seed + i")->capture_default_str();
  s_ev->add_option("--runs", ev.runs, "Runs for neural models")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s_ev->add_flag("--timing", ev.timing, "Record wall-clock seconds per run");
  ev.model.add(*s_ev, false);

  std::string cmp_a, cmp_b, cmp_out;
  double confidence = 0.99;
  auto* s_cmp = app.add_subcommand("compare", "Welch t-test between two reports");
  s_cmp->add_option("a", cmp_a, "Report A")->required();
  s_cmp->add_option("b", cmp_b, "Report B")->required();
  s_cmp->add_option("--confidence", confidence, "Confidence level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s_cmp->add_option("--output", cmp_out, "Comparison JSON");

  int gc_n = 100;
  std::uint64_t gc_seed = 0;
  std::string gc_out;
  auto* s_gc = app.add_subcommand("gradcheck", "Finite-difference check of the LSTM gradients");
  s_gc->add_option("--n", gc_n, "Random configurations")->check(CLI::PositiveNumber)->capture_default_str();
  s_gc->add_option("--seed", gc_seed, "Seed")->capture_default_str();
  s_gc->add_option("--output", gc_out, "Per-case report JSON");

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "Hyperparameter grid ranked by validation accuracy");
  s_sw->add_option("--input", sw.input, "Corpus directory")->required();
  s_sw->add_option("--output", sw.output, "Output directory");
  s_sw->add_option("--seed", sw.seed, "Training seed")->capture_default_str();
  s_sw->add_option("--hidden-grid", sw.hidden_grid, "Hidden sizes")->capture_default_str();
  s_sw->add_option("--lr-grid", sw.lr_grid, "Learning rates")->capture_default_str();
  s_sw->add_option("--batch-grid", sw.batch_grid, "Batch sizes")->capture_default_str();
  sw.model.add(*s_sw, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*s_sz) return cmd_sessionize(sz, out, err);
    if (*s_pr) return cmd_prepare(pr, out);
    if (*s_st) return cmd_stats(st_in, st_out, out);
    if (*s_ge) return cmd_generate(ge, out);
    if (*s_tr) return cmd_train(tr, out);
    if (*s_ev) return cmd_evaluate(ev, out);
    if (*s_cmp) return cmd_compare(cmp_a, cmp_b, confidence, cmp_out, out);
    if (*s_gc) return cmd_gradcheck(gc_n, gc_seed, gc_out, out);
    if (*s_sw) return cmd_sweep(sw, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace clickstream::cli
