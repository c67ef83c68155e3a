#include "tsp/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>

#include "tsp/binio.hpp"
#include "tsp/config.hpp"
#include "tsp/error.hpp"
#include "tsp/hash.hpp"
#include "tsp/manifest.hpp"
#include "tsp/report.hpp"
#include "tsp/rng.hpp"

namespace tsp {

namespace {

namespace fs = std::filesystem;

RunManifest make_manifest(const std::string& command,
                          const nlohmann::json& config) {
  RunManifest m;
  m.command = command;
  m.config_echo = config;
  m.config_hash = config_hash_of(config);
  return m;
}

void ensure_parent_dir(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void cmd_gen_scenes(const nlohmann::json& config, const fs::path& out_dir) {
  const GenScenesConfig cfg = parse_gen_scenes_config(config);
  fs::create_directories(out_dir);
  RunManifest manifest = make_manifest("gen-scenes", config);
  for (const SceneClassSpec& spec : cfg.classes) {
    for (std::uint32_t k = 0; k < cfg.variants_per_class; ++k) {
      const std::uint64_t seed =
          derive_seed(cfg.seed, Stream::kScene,
                      {static_cast<std::uint64_t>(spec.class_id), k});
      const DepthReflMap map = gen_scene(spec, seed, cfg.width, cfg.height);
      char name[64];
      std::snprintf(name, sizeof(name), "class_%03d_var_%03u.tspm",
                    spec.class_id, k);
      const fs::path path = out_dir / name;
      save_map(map, path);
      manifest.add_output(path);
      std::cout << "wrote " << path.string() << "\n";
    }
  }
  manifest.write(out_dir / "manifest.json");
}

void cmd_gen(const nlohmann::json& config, const fs::path& out_file,
             unsigned workers) {
  const DatasetConfig cfg = parse_dataset_config(config);
  const Dataset ds = generate_dataset(cfg, workers);
  ensure_parent_dir(out_file);
  save_dataset(ds, out_file);

  RunManifest manifest = make_manifest("gen", config);
  manifest.add_output(out_file);
  // Per-cell tallies recounted from the records actually written.
  std::map<std::pair<std::uint32_t, float>, std::uint64_t> tally;
  for (const auto& r : ds.records) ++tally[{r.label, r.snr_db}];
  manifest.extra["record_count"] = ds.records.size();
  manifest.extra["cells"] = nlohmann::json::array();
  for (const auto& [key, count] : tally)
    manifest.extra["cells"].push_back({{"class_id", key.first},
                                       {"snr_db", key.second},
                                       {"count", count}});
  manifest.write(fs::path(out_file.string() + ".manifest.json"));
  std::cout << "wrote " << out_file.string() << " (" << ds.records.size()
            << " records)\n";
}

void cmd_train(const nlohmann::json& config, const fs::path& out_file) {
  const TrainCommandConfig cfg = parse_train_config(config);
  const Dataset ds = load_dataset(cfg.dataset);
  const Splits splits = split_dataset(ds, cfg.split, cfg.labels);

  RunManifest manifest = make_manifest("train", config);
  manifest.add_input(cfg.dataset);
  ensure_parent_dir(out_file);
  const fs::path trace_path = out_file.string() + ".trace.csv";

  if (cfg.baseline) {
    auto [model, trace] = train_baseline(ds, splits.train, cfg.base);
    model.save(out_file);
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e) {
      std::ostringstream line;
      line.precision(17);
      line << e << ',' << trace[e] << '\n';
      csv += line.str();
    }
    write_file_atomic(trace_path, csv);
  } else {
    auto [model, trace] = train_encoder_decoder(ds, splits.train, cfg.net);
    model.save(out_file);
    write_file_atomic(trace_path, trace_to_csv(trace));
  }
  manifest.add_output(out_file);
  manifest.add_output(trace_path);
  manifest.write(fs::path(out_file.string() + ".manifest.json"));
  std::cout << "wrote " << out_file.string() << "\n";
}

void cmd_skb_build(const nlohmann::json& config, const fs::path& out_file) {
  const SkbBuildConfig cfg = parse_skb_build_config(config);
  const Dataset ds = load_dataset(cfg.dataset);
  const EncoderDecoder model = EncoderDecoder::load(cfg.model);
  const Splits splits = split_dataset(ds, cfg.split, model.class_labels());

  const std::vector<VectorXd> features =
      extract_features(model, ds, splits.val);
  std::vector<std::uint32_t> labels(splits.val.size());
  for (std::size_t i = 0; i < splits.val.size(); ++i)
    labels[i] = ds.records[splits.val[i]].label;
  const Skb skb = build_skb(features, labels, cfg.var_floor);

  ensure_parent_dir(out_file);
  skb.save(out_file);
  const fs::path json_path = out_file.string() + ".json";
  write_file_atomic(json_path, skb.to_json());

  RunManifest manifest = make_manifest("skb-build", config);
  manifest.add_input(cfg.dataset);
  manifest.add_input(cfg.model);
  manifest.add_output(out_file);
  manifest.add_output(json_path);
  manifest.extra["entries"] = skb.entries().size();
  manifest.write(fs::path(out_file.string() + ".manifest.json"));
  std::cout << "wrote " << out_file.string() << " ("
            << skb.entries().size() << " entries)\n";
}

void cmd_eval_closed(const nlohmann::json& config, const fs::path& out_dir) {
  const EvalClosedConfig cfg = parse_eval_closed_config(config);
  const Dataset ds = load_dataset(cfg.dataset);
  const EncoderDecoder model = EncoderDecoder::load(cfg.model);
  const Skb skb = Skb::load(cfg.skb);
  const SoftmaxClassifier baseline = SoftmaxClassifier::load(cfg.baseline);

  std::vector<std::uint32_t> known;
  for (const auto& e : skb.entries())
    known.push_back(static_cast<std::uint32_t>(e.class_id));
  std::sort(known.begin(), known.end());
  const Splits splits = split_dataset(ds, cfg.split, known);

  const std::string hash = config_hash_of(config);
  const ClosedEvalResult result =
      eval_closed(ds, model, skb, baseline, splits, short_hash(hash));

  fs::create_directories(out_dir);
  RunManifest manifest = make_manifest("eval-closed", config);
  manifest.add_input(cfg.dataset);
  manifest.add_input(cfg.model);
  manifest.add_input(cfg.skb);
  manifest.add_input(cfg.baseline);
  for (const fs::path& p :
       emit_report(result.table, out_dir, "closed", "closed-set accuracy"))
    manifest.add_output(p);
  const fs::path log_path = out_dir / "predictions.csv";
  write_file_atomic(log_path, result.prediction_log);
  manifest.add_output(log_path);
  manifest.write(out_dir / "manifest.json");
  std::cout << "wrote " << (out_dir / "closed.csv").string() << "\n";
}

void cmd_eval_open(const nlohmann::json& config, const fs::path& out_dir) {
  EvalOpenConfig cfg = parse_eval_open_config(config);
  const Dataset ds = load_dataset(cfg.dataset);
  const EncoderDecoder model = EncoderDecoder::load(cfg.model);
  const Skb skb = Skb::load(cfg.skb);

  const std::string hash = config_hash_of(config);
  cfg.settings.config_hash = short_hash(hash);
  const OpenEvalResult result = eval_open(ds, model, skb, cfg.settings);

  fs::create_directories(out_dir);
  RunManifest manifest = make_manifest("eval-open", config);
  manifest.add_input(cfg.dataset);
  manifest.add_input(cfg.model);
  manifest.add_input(cfg.skb);
  if (cfg.settings.run_snr_sweep)
    for (const fs::path& p : emit_report(result.snr_table, out_dir,
                                         "open_snr", "open-set accuracy vs snr"))
      manifest.add_output(p);
  for (const fs::path& p :
       emit_report(result.count_table, out_dir, "open_count",
                   "open-set accuracy vs unknown-class count"))
    manifest.add_output(p);
  const fs::path log_path = out_dir / "predictions.csv";
  write_file_atomic(log_path, result.prediction_log);
  manifest.add_output(log_path);
  const fs::path summary_path = out_dir / "summary.json";
  write_file_atomic(summary_path, result.summary.dump(2) + "\n");
  manifest.add_output(summary_path);
  manifest.write(out_dir / "manifest.json");
  std::cout << "wrote " << summary_path.string() << "\n";
}

void cmd_plot(const nlohmann::json& config, const fs::path& out_dir) {
  const PlotConfig cfg = parse_plot_config(config);
  fs::create_directories(out_dir);
  RunManifest manifest = make_manifest("plot", config);
  for (const fs::path& csv : cfg.tables) {
    manifest.add_input(csv);
    const std::vector<char> bytes = read_file(csv);
    const ResultTable table =
        table_from_csv(std::string(bytes.begin(), bytes.end()), csv.string());
    if (table.rows.empty()) {
      std::cerr << "warning: table " << csv.string()
                << " is empty; no plot emitted\n";
      continue;
    }
    const fs::path svg_path = out_dir / (csv.stem().string() + ".svg");
    write_file_atomic(svg_path, render_svg(table, csv.stem().string()));
    manifest.add_output(svg_path);
    std::cout << "wrote " << svg_path.string() << "\n";
  }
  manifest.write(out_dir / "manifest.json");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"temporal single-photon lidar recognition pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  unsigned workers = 1;

  auto add_common = [&](CLI::App* sub, const char* out_desc) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, out_desc)->required();
  };

  CLI::App* gen_scenes =
      app.add_subcommand("gen-scenes", "generate scene map files");
  add_common(gen_scenes, "output directory");

  CLI::App* gen = app.add_subcommand("gen", "generate a histogram dataset");
  add_common(gen, "output dataset file");
  gen->add_option("--workers", workers, "worker threads (default 1)");

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, "output checkpoint file");

  CLI::App* skb_build =
      app.add_subcommand("skb-build", "build the knowledge base");
  add_common(skb_build, "output SKB file");

  CLI::App* eval_closed_cmd =
      app.add_subcommand("eval-closed", "closed-set evaluation");
  add_common(eval_closed_cmd, "output directory");

  CLI::App* eval_open_cmd =
      app.add_subcommand("eval-open", "open-set evaluation");
  add_common(eval_open_cmd, "output directory");

  CLI::App* plot = app.add_subcommand("plot", "re-render plots from CSVs");
  add_common(plot, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  }

  try {
    const nlohmann::json config = load_json_file(config_path);
    if (gen_scenes->parsed()) cmd_gen_scenes(config, out_path);
    if (gen->parsed()) cmd_gen(config, out_path, workers);
    if (train->parsed()) cmd_train(config, out_path);
    if (skb_build->parsed()) cmd_skb_build(config, out_path);
    if (eval_closed_cmd->parsed()) cmd_eval_closed(config, out_path);
    if (eval_open_cmd->parsed()) cmd_eval_open(config, out_path);
    if (plot->parsed()) cmd_plot(config, out_path);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace tsp
