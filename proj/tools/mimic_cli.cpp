// mimic: command-line driver for the earnings-call forecasting pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training/runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mimic/mimic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

class UsageError : public mimic::Error {
 public:
  using mimic::Error::Error;
};

struct RunOptions {
  std::string manifest;
  std::string out = "out";
  std::string config;
  std::vector<std::string> variants;
  bool all = false;
  std::uint64_t seed = 7;
  std::string train_end = "2024-02-07";
  std::string val_end = "2024-08-09";
  std::size_t epochs = 0;
  std::size_t patience = 0;
  std::size_t batch_size = 0;
  double learning_rate = 0.0;
  std::size_t folds = 0;
};

struct ResolvedRun {
  fs::path manifest;
  fs::path out;
  mimic::SplitSpec split;
  mimic::TrainConfig train;
  std::vector<mimic::Variant> variants;
};

mimic::Date parse_date_arg(const std::string& s, const char* what) {
  try {
    return mimic::Date::parse(s);
  } catch (const mimic::DataError&) {
    throw UsageError(std::string(what) + ": expected YYYY-MM-DD, got '" + s + "'");
  }
}

mimic::Variant parse_variant_arg(const std::string& s) {
  if (auto v = mimic::parse_variant(s)) return *v;
  throw UsageError("unknown variant '" + s + "' (expected one of N, N_T_Em, N_T_P, N_T_Em_I_Em, N_T_P_I_P)");
}

// Built-in defaults, overridden by the config file, overridden by flags.
ResolvedRun resolve_run(const RunOptions& o, const CLI::App& cmd) {
  ResolvedRun r;
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  std::vector<std::string> variant_names;
  bool all = false;
  std::string train_end = "2024-02-07", val_end = "2024-08-09";
  std::string manifest;

  if (!o.config.empty()) {
    json cfg;
    try {
      cfg = json::parse(mimic::read_file(o.config));
    } catch (const json::exception& e) {
      throw UsageError("config '" + o.config + "': " + e.what());
    }
    try {
      if (cfg.contains("train")) r.train = cfg["train"].get<mimic::TrainConfig>();
      if (cfg.contains("seed")) r.train.seed = cfg["seed"].get<std::uint64_t>();
      manifest = cfg.value("manifest", manifest);
      train_end = cfg.value("train_end", train_end);
      val_end = cfg.value("val_end", val_end);
      if (cfg.contains("variants")) variant_names = cfg["variants"].get<std::vector<std::string>>();
      all = cfg.value("all", false);
      if (cfg.contains("out")) r.out = cfg["out"].get<std::string>();
    } catch (const json::exception& e) {
      throw UsageError("config '" + o.config + "': " + e.what());
    }
  }
  if (given("--manifest")) manifest = o.manifest;
  if (given("--out") || r.out.empty()) r.out = o.out;
  if (given("--seed")) r.train.seed = o.seed;
  if (given("--train-end")) train_end = o.train_end;
  if (given("--val-end")) val_end = o.val_end;
  if (given("--variant")) variant_names = o.variants;
  if (given("--all")) all = true;
  if (given("--epochs")) r.train.mlp.epochs = o.epochs;
  if (given("--patience")) r.train.mlp.patience = o.patience;
  if (given("--batch-size")) r.train.mlp.batch_size = o.batch_size;
  if (given("--learning-rate")) r.train.mlp.learning_rate = o.learning_rate;
  if (given("--folds")) r.train.stage1_folds = o.folds;

  if (manifest.empty()) throw UsageError("run: --manifest is required");
  r.manifest = manifest;
  if (!fs::is_regular_file(r.manifest)) throw UsageError("manifest '" + manifest + "' does not exist");
  r.split = {parse_date_arg(train_end, "--train-end"), parse_date_arg(val_end, "--val-end")};
  if (!(r.split.train_end < r.split.val_end)) throw UsageError("--train-end must precede --val-end");
  if (all && !variant_names.empty()) throw UsageError("use either --all or --variant");
  if (all || variant_names.empty()) {
    r.variants.assign(mimic::kAllVariants.begin(), mimic::kAllVariants.end());
  } else {
    for (const auto& n : variant_names) r.variants.push_back(parse_variant_arg(n));
  }
  if (r.train.mlp.batch_size == 0) throw UsageError("batch size must be positive");
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec || !fs::is_directory(r.out)) throw UsageError("cannot create output directory '" + r.out.string() + "'");
  return r;
}

int cmd_validate(const std::string& path) {
  const auto m = mimic::load_manifest(path);
  const auto rep = mimic::validate_dataset(m);
  std::cout << rep.instances << " instances, " << rep.companies << " companies (" << rep.missing_text
            << " without text embedding, " << rep.missing_images << " without image embeddings)\n";
  const auto parts = mimic::temporal_split(m, mimic::SplitSpec{});
  std::cout << "default split: train " << parts.train.size() << ", val " << parts.val.size() << ", test "
            << parts.test.size() << "\n";
  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  for (const auto& e : rep.errors) std::cerr << "error: " << e << "\n";
  if (!rep.clean()) {
    std::cerr << rep.errors.size() << " error(s)\n";
    return kData;
  }
  std::cout << "ok\n";
  return kOk;
}

int cmd_synth(const fs::path& out, const mimic::SynthOptions& opt) {
  if (opt.n < 10) throw UsageError("synth: --n must be at least 10");
  const auto s = mimic::generate_synthetic(out, opt);
  std::cout << "wrote " << s.instances << " instances for " << s.companies << " companies to "
            << (out / "manifest.json").string() << "\n"
            << "positive rate " << s.positive_rate << ", text sign agreement " << s.text_agreement
            << ", image sign agreement " << s.image_agreement << "\n"
            << "default split: train " << s.train << ", val " << s.val << ", test " << s.test << "\n";
  return kOk;
}

int cmd_run(const RunOptions& o, const CLI::App& cmd) {
  const ResolvedRun r = resolve_run(o, cmd);
  const auto manifest = mimic::load_manifest(r.manifest);
  const fs::path models_dir = r.out / "models";

  auto persist = [&](const mimic::CascadeFit& fit, const mimic::VariantResult&) {
    const fs::path dir = models_dir / std::string(mimic::variant_id(fit.model.variant));
    fs::create_directories(dir);
    mimic::write_file_atomic(dir / "regressor.mdl", fit.model.regressor.serialize());
    if (fit.model.stage1.text) mimic::write_file_atomic(dir / "text_gbt.mdl", fit.model.stage1.text->serialize());
    if (fit.model.stage1.image) mimic::write_file_atomic(dir / "image_rf.mdl", fit.model.stage1.image->serialize());
    const json schema{{"variant", mimic::variant_id(fit.model.variant)},
                      {"embedding_dim", fit.model.embedding_dim},
                      {"text_prior", fit.model.stage1.text_prior},
                      {"image_prior", fit.model.stage1.image_prior},
                      {"columns", fit.model.schema}};
    mimic::write_file_atomic(dir / "schema.json", schema.dump(1) + "\n");
  };
  const auto rep = mimic::run_ablation(manifest, r.split, r.train, r.variants, nullptr, persist);

  json doc = mimic::report_to_json(rep);
  json variants = json::array();
  for (auto v : r.variants) variants.push_back(mimic::variant_id(v));
  doc["config"]["run"] = {{"manifest", r.manifest.string()}, {"variants", variants}};
  mimic::write_file_atomic(r.out / "report.json", doc.dump(2) + "\n");
  const std::string table = mimic::render_report_table(doc);
  mimic::write_file_atomic(r.out / "report.txt", table);
  std::cout << table;
  return kOk;
}

int cmd_llm(const std::string& manifest_path, const mimic::BaselineConfig& cfg, const std::string& train_end,
            const std::string& val_end, const std::string& out) {
  if (cfg.endpoint.empty()) throw UsageError("llm-baseline: --endpoint is required");
  const mimic::SplitSpec split{parse_date_arg(train_end, "--train-end"), parse_date_arg(val_end, "--val-end")};
  const auto manifest = mimic::load_manifest(manifest_path);
  std::optional<std::string> key;
  if (const char* k = std::getenv("MIMIC_VLM_API_KEY"); k && *k) key = k;
  const auto res = mimic::run_baseline(manifest, split, cfg, mimic::http_transport(manifest.root, key));

  json records = json::array();
  for (const auto& r : res.records)
    records.push_back({{"instance_id", r.instance_id},
                       {"target", r.target},
                       {"prediction", r.prediction ? json(*r.prediction) : json(nullptr)},
                       {"relative_error", r.relative_error ? json(*r.relative_error) : json(nullptr)},
                       {"cached", r.cached},
                       {"error", r.error}});
  const json doc{{"model", cfg.model_name},
                 {"endpoint", cfg.endpoint},
                 {"mae", res.metrics.mae},
                 {"rmse", res.metrics.rmse},
                 {"mape", res.metrics.mape},
                 {"n", res.metrics.n},
                 {"requests_sent", res.requests_sent},
                 {"cache_hits", res.cache_hits},
                 {"parse_failures", res.parse_failures},
                 {"network_failures", res.network_failures},
                 {"records", records}};
  if (!out.empty()) mimic::write_file_atomic(out, doc.dump(2) + "\n");
  std::printf("%-10s MAE %.3f  RMSE %.3f  MAPE %.3f  (n=%zu, requests %zu, cache hits %zu)\n",
              cfg.model_name.c_str(), res.metrics.mae, res.metrics.rmse, res.metrics.mape, res.metrics.n,
              res.requests_sent, res.cache_hits);
  if (res.parse_failures + res.network_failures > 0)
    std::cerr << "warning: skipped " << res.parse_failures << " unparseable and " << res.network_failures
              << " failed requests\n";
  return kOk;
}

int cmd_report(const std::string& path, bool as_json) {
  json doc;
  try {
    doc = json::parse(mimic::read_file(path));
  } catch (const json::exception& e) {
    throw mimic::DataError("report '" + path + "': " + e.what());
  }
  if (!doc.contains("results")) throw mimic::DataError("report '" + path + "': no results");
  if (as_json)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << mimic::render_report_table(doc);
  return kOk;
}

int cmd_describe(const std::string& path) {
  const std::string bytes = mimic::read_file(path);
  switch (mimic::peek_model_kind(bytes)) {
    case mimic::ModelKind::gbt: std::cout << mimic::GbtClassifier::deserialize(bytes).describe(); break;
    case mimic::ModelKind::random_forest: std::cout << mimic::RfClassifier::deserialize(bytes).describe(); break;
    case mimic::ModelKind::mlp: std::cout << mimic::MlpRegressor::deserialize(bytes).describe(); break;
    default: throw mimic::DataError("'" + path + "': unknown model kind");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded multimodal forecasting of next-day opening prices after earnings calls"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Load and check a dataset manifest");
  validate->add_option("manifest", validate_path, "Manifest JSON")->required();

  fs::path synth_out;
  mimic::SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with a known direction signal");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n", synth_opt.n, "Number of instances")->capture_default_str();
  synth->add_option("--seed", synth_opt.seed, "Generator seed")->capture_default_str();
  synth->add_option("--agreement", synth_opt.signal_agreement, "Embedding sign/label agreement")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--text-dim", synth_opt.text_dim, "Native text embedding dimension")->capture_default_str();
  synth->add_option("--image-dim", synth_opt.image_dim, "Native image embedding dimension")->capture_default_str();

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Train and evaluate one or more feature variants");
  run->add_option("--manifest", run_opt.manifest, "Manifest JSON");
  run->add_option("--out", run_opt.out, "Output directory for report and models")->capture_default_str();
  run->add_option("--config", run_opt.config, "JSON config file (flags take precedence)");
  run->add_option("--variant", run_opt.variants, "Variant(s): N, N_T_Em, N_T_P, N_T_Em_I_Em, N_T_P_I_P");
  run->add_flag("--all", run_opt.all, "Run all five variants");
  run->add_option("--seed", run_opt.seed, "Training seed");
  run->add_option("--train-end", run_opt.train_end, "Last training date (YYYY-MM-DD)");
  run->add_option("--val-end", run_opt.val_end, "Last validation date (YYYY-MM-DD)");
  run->add_option("--epochs", run_opt.epochs, "Regressor epochs");
  run->add_option("--patience", run_opt.patience, "Early-stopping patience");
  run->add_option("--batch-size", run_opt.batch_size, "Regressor mini-batch size");
  run->add_option("--learning-rate", run_opt.learning_rate, "Regressor Adam step size");
  run->add_option("--folds", run_opt.folds, "Out-of-fold folds for stage-1 probabilities");

  std::string llm_manifest, llm_out, llm_train_end = "2024-02-07", llm_val_end = "2024-08-09";
  mimic::BaselineConfig llm_cfg;
  auto* llm = app.add_subcommand("llm-baseline", "Zero-shot VLM baseline against an HTTP endpoint");
  llm->add_option("--manifest", llm_manifest, "Manifest JSON")->required();
  llm->add_option("--endpoint", llm_cfg.endpoint, "Endpoint URL, e.g. http://localhost:8080/v1/generate")->required();
  llm->add_option("--model", llm_cfg.model_name, "Model name sent to the endpoint")->capture_default_str();
  llm->add_option("--cache-dir", llm_cfg.cache_dir, "Response cache directory")->capture_default_str();
  llm->add_option("--timeout", llm_cfg.timeout_seconds, "Per-request timeout (seconds)")->capture_default_str();
  llm->add_option("--concurrency", llm_cfg.concurrency, "Concurrent requests")->capture_default_str();
  llm->add_flag("--strict", llm_cfg.strict, "Reject responses that are not a bare number");
  llm->add_option("--train-end", llm_train_end, "Last training date")->capture_default_str();
  llm->add_option("--val-end", llm_val_end, "Last validation date")->capture_default_str();
  llm->add_option("--out", llm_out, "Write per-instance results as JSON");

  std::string report_path;
  bool report_json = false;
  auto* report = app.add_subcommand("report", "Render a stored report.json");
  report->add_option("report", report_path, "report.json")->required();
  report->add_flag("--json", report_json, "Print JSON instead of the table");

  std::string describe_path;
  auto* describe = app.add_subcommand("describe", "Print a stored model's configuration and structure");
  describe->add_option("model", describe_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*synth) return cmd_synth(synth_out, synth_opt);
    if (*run) return cmd_run(run_opt, *run);
    if (*llm) return cmd_llm(llm_manifest, llm_cfg, llm_train_end, llm_val_end, llm_out);
    if (*report) return cmd_report(report_path, report_json);
    if (*describe) return cmd_describe(describe_path);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const mimic::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const mimic::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
