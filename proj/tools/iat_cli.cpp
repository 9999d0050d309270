// iat: command-line front end for simulation, scoring, featurization,
// training, evaluation and the ingestion service.

#include <iat/iat.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace {

using namespace iat;

std::string slurp(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A single (possibly pretty-printed) session document, or a JSON Lines archive.
std::vector<Session> load_sessions(const std::string& path) {
  const auto text = slurp(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  ojson doc = ojson::parse(text, nullptr, false);
  if (!doc.is_discarded() && doc.is_object()) return {session_from_json(doc)};
  std::istringstream is(text);
  return read_archive(is);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

struct TrainFlags {
  TrainConfig cfg;
  void add(CLI::App* app) {
    app->add_option("--epochs", cfg.epochs, "MLP training epochs")->capture_default_str();
    app->add_option("--keep-prob", cfg.keep_prob, "MLP dropout keep probability")
        ->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "MLP learning rate")->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size, "MLP mini-batch size")
        ->capture_default_str();
    app->add_option("--l2", cfg.l2, "L2 penalty")->capture_default_str();
    app->add_option("--hidden", cfg.hidden_units, "MLP hidden units")->capture_default_str();
    app->add_option("--threshold", cfg.threshold, "decision threshold on P(second)")
        ->capture_default_str();
    app->add_option("--ratio-threshold", cfg.ratio_threshold,
                    "fixed ratio-baseline threshold (default: fitted)");
  }
};

Variant parse_variant(const std::string& s) {
  if (s == "unpruned") return Variant::Unpruned;
  if (s == "pruned") return Variant::Pruned;
  throw CLI::ValidationError("--variant", "expected unpruned|pruned");
}

DetectorKind parse_detector(const std::string& s) {
  auto k = detector_from_string(s);
  if (!k) throw CLI::ValidationError("--detector", "unknown detector " + s);
  return *k;
}

Scheme parse_scheme(const std::string& s, int k) {
  if (s == "loocv") return Scheme::loocv();
  if (s == "kfold") return Scheme::kfold(k);
  throw CLI::ValidationError("--scheme", "expected loocv|kfold");
}

Datasets datasets_from(const std::string& path) {
  const auto grouped = group_sessions(load_sessions(path));
  return assemble_datasets(grouped.cohort, grouped.extra_firsts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit Association Test second-attempt detection toolkit"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a simulated cohort archive (JSON Lines)");
  std::size_t pairs = 67, extra = 0;
  std::string sim_out, manifest_out;
  std::vector<double> mix_v;
  sim->add_option("--pairs", pairs, "participants with two attempts")->capture_default_str();
  sim->add_option("--extra-firsts", extra, "additional unpaired first attempts");
  sim->add_option("--seed", seed, "master seed")->capture_default_str();
  sim->add_option("--out,-o", sim_out, "archive path (default stdout)");
  sim->add_option("--manifest", manifest_out,
                  "manifest path (default <out>.manifest.json when --out is given)");
  sim->add_option("--mix", mix_v, "mode probabilities: correct none practice wrong_critical")
      ->expected(4);

  // score
  auto* score = app.add_subcommand("score", "score sessions, one JSON object per line");
  std::string in_path = "-";
  score->add_option("input", in_path, "session file or archive (default stdin)");
  score->add_option("--seed", seed);

  // features
  auto* feats = app.add_subcommand("features", "write the feature matrix as CSV");
  std::string variant_s = "unpruned", out_path, mask_path;
  bool do_select = false;
  double sel_threshold = 0.75;
  feats->add_option("input", in_path, "cohort archive (default stdin)");
  feats->add_option("--variant", variant_s, "unpruned|pruned")->capture_default_str();
  feats->add_option("--out,-o", out_path, "CSV path (default stdout)");
  feats->add_option("--mask", mask_path, "write the selected-feature sidecar JSON here");
  feats->add_flag("--select", do_select, "apply correlation selection before writing the mask");
  feats->add_option("--selection-threshold", sel_threshold)->capture_default_str();
  feats->add_option("--seed", seed);

  // select
  auto* sel = app.add_subcommand("select", "correlation-based feature selection on a CSV");
  sel->add_option("input", in_path, "feature CSV (default stdin)");
  sel->add_option("--threshold", sel_threshold, "absolute Pearson r cut-off")
      ->capture_default_str();
  sel->add_option("--out,-o", out_path, "mask JSON path (default stdout)");
  sel->add_option("--seed", seed);

  // train
  auto* train = app.add_subcommand("train", "fit a detector and write the model JSON");
  std::string detector_s = "mlp", features_path;
  TrainFlags train_flags;
  train->add_option("input", in_path, "cohort archive (default stdin)");
  train->add_option("--detector", detector_s, "naive_bayes|logistic|mlp|ratio")
      ->capture_default_str();
  train->add_option("--variant", variant_s)->capture_default_str();
  train->add_option("--features", features_path, "train from a feature CSV instead");
  train->add_option("--mask", mask_path, "sidecar mask for --features");
  train->add_option("--selection-threshold", sel_threshold)->capture_default_str();
  train->add_option("--out,-o", out_path, "model path (default stdout)");
  train->add_option("--seed", seed)->capture_default_str();
  train_flags.add(train);

  // eval
  auto* eval = app.add_subcommand("eval", "cross-validate detectors");
  std::string scheme_s = "loocv", report_out;
  int k = 10;
  bool table = false, per_fold = false;
  std::string eval_detector = "all", eval_variant = "all";
  TrainFlags eval_flags;
  eval->add_option("input", in_path, "cohort archive (default stdin)");
  eval->add_option("--detector", eval_detector, "naive_bayes|logistic|mlp|ratio|all")
      ->capture_default_str();
  eval->add_option("--variant", eval_variant, "unpruned|pruned|all")->capture_default_str();
  eval->add_option("--scheme", scheme_s, "loocv|kfold")->capture_default_str();
  eval->add_option("--k", k, "folds for kfold")->capture_default_str();
  eval->add_flag("--per-fold-selection", per_fold, "recompute the feature mask inside each fold");
  eval->add_option("--selection-threshold", sel_threshold)->capture_default_str();
  eval->add_flag("--table", table, "print the weighted-F1 table instead of JSON");
  eval->add_option("--out,-o", report_out, "JSON report path (default stdout)");
  eval->add_option("--seed", seed)->capture_default_str();
  eval_flags.add(eval);

  // baseline
  auto* base = app.add_subcommand("baseline", "cross-validate the latency-ratio baseline");
  TrainFlags base_flags;
  base->add_option("input", in_path, "cohort archive (default stdin)");
  base->add_option("--variant", eval_variant, "unpruned|pruned|all")->capture_default_str();
  base->add_option("--scheme", scheme_s)->capture_default_str();
  base->add_option("--k", k)->capture_default_str();
  base->add_flag("--table", table);
  base->add_option("--out,-o", report_out);
  base->add_option("--seed", seed)->capture_default_str();
  base_flags.add(base);

  // stats
  auto* st = app.add_subcommand("stats", "critical-block summary of a cohort");
  bool as_json = false;
  st->add_option("input", in_path, "cohort archive (default stdin)");
  st->add_flag("--json", as_json, "emit JSON instead of the text table");
  st->add_option("--seed", seed);

  // serve
  auto* srv = app.add_subcommand("serve", "run the session ingestion service");
  ServiceConfig svc_cfg;
  std::string store_path;
  srv->add_option("--port", svc_cfg.port)->capture_default_str();
  srv->add_option("--host", svc_cfg.host)->capture_default_str();
  srv->add_option("--store", store_path, "store path (default $IAT_STORE or sessions.jsonl)");
  srv->add_option("--seed", seed)->capture_default_str();

  // detect
  auto* det = app.add_subcommand("detect", "score, featurize and classify new sessions");
  std::string model_path;
  std::vector<std::string> session_paths;
  det->add_option("--model", model_path, "model JSON")->required();
  det->add_option("sessions", session_paths, "session files or archives (default stdin)");
  det->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) {
      ModeMix mix;
      if (!mix_v.empty()) mix = {mix_v[0], mix_v[1], mix_v[2], mix_v[3]};
      const Calibration cal;
      const auto result = simulate_cohort(pairs, mix, cal, seed, extra);
      std::ostringstream os;
      write_archive(os, cohort_sessions(result.cohort, result.extra_firsts));
      write_text(sim_out, os.str());
      if (manifest_out.empty() && !sim_out.empty() && sim_out != "-")
        manifest_out = sim_out + ".manifest.json";
      if (!manifest_out.empty())
        write_text(manifest_out,
                   simulation_manifest(pairs, extra, mix, cal, seed).dump(2) + "\n");
    } else if (*score) {
      for (const auto& s : load_sessions(in_path))
        std::cout << score_to_json(s.session_id, d_score(s)).dump() << '\n';
    } else if (*feats) {
      const auto d = datasets_from(in_path);
      auto m = parse_variant(variant_s) == Variant::Unpruned ? d.unpruned : d.pruned;
      if (do_select) m = select_features(std::move(m), sel_threshold);
      std::ostringstream os;
      write_feature_csv(os, m);
      write_text(out_path, os.str());
      if (!mask_path.empty()) write_text(mask_path, mask_to_json(m) + "\n");
    } else if (*sel) {
      std::istringstream is(slurp(in_path));
      auto m = select_features(read_feature_csv(is), sel_threshold);
      write_text(out_path, mask_to_json(m) + "\n");
    } else if (*train) {
      const auto kind = parse_detector(detector_s);
      auto cfg = train_flags.cfg;
      cfg.seed = seed;
      FeatureMatrix m;
      if (!features_path.empty()) {
        std::istringstream is(slurp(features_path));
        m = read_feature_csv(is);
        if (!mask_path.empty()) apply_mask_json(m, slurp(mask_path));
      } else {
        PipelineOptions opt;
        opt.selection_threshold = sel_threshold;
        m = detector_matrix(datasets_from(in_path), kind, parse_variant(variant_s), opt);
      }
      write_text(out_path, model_to_json(fit(kind, m, cfg)).dump(2) + "\n");
    } else if (*eval || *base) {
      const auto scheme = parse_scheme(scheme_s, k);
      auto cfg = (*eval ? eval_flags : base_flags).cfg;
      cfg.seed = seed;
      std::vector<DetectorKind> kinds;
      if (*base)
        kinds = {DetectorKind::Ratio};
      else if (eval_detector == "all")
        kinds = {DetectorKind::NaiveBayes, DetectorKind::Logistic, DetectorKind::Mlp,
                 DetectorKind::Ratio};
      else
        kinds = {parse_detector(eval_detector)};
      std::vector<Variant> variants;
      if (eval_variant == "all")
        variants = {Variant::Unpruned, Variant::Pruned};
      else
        variants = {parse_variant(eval_variant)};
      PipelineOptions opt;
      opt.selection_threshold = sel_threshold;
      opt.per_fold_selection = per_fold;
      const auto d = datasets_from(in_path);
      std::vector<EvalReport> reports;
      for (auto kind : kinds)
        for (auto v : variants) reports.push_back(evaluate(d, kind, v, cfg, scheme, opt));
      ojson j;
      if (reports.size() == 1) {
        j = report_to_json(reports.front());
      } else {
        j = ojson::array();
        for (const auto& r : reports) j.push_back(report_to_json(r));
      }
      if (table) {
        std::cout << render_f1_table(reports);
        if (!report_out.empty()) write_text(report_out, j.dump(2) + "\n");
      } else {
        write_text(report_out, j.dump(2) + "\n");
      }
    } else if (*st) {
      const auto grouped = group_sessions(load_sessions(in_path));
      const auto s = cohort_stats(grouped.cohort);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
      if (as_json)
        std::cout << cohort_stats_to_json(s).dump(2) << '\n';
      else
        std::cout << render_cohort_table(s);
    } else if (*srv) {
      if (store_path.empty()) {
        const char* env = std::getenv("IAT_STORE");
        store_path = env ? env : "sessions.jsonl";
      }
      svc_cfg.seed = seed;
      SessionStore store(store_path);
      std::cerr << "listening on " << svc_cfg.host << ':' << svc_cfg.port << " (store "
                << store_path << ")\n";
      if (!serve(store, svc_cfg)) throw Error("failed to bind the listening socket");
    } else if (*det) {
      const auto model = model_from_json(ojson::parse(slurp(model_path)));
      if (session_paths.empty()) session_paths.push_back("-");
      for (const auto& p : session_paths)
        for (const auto& s : load_sessions(p)) {
          double proba = 0.0;
          if (model.kind == DetectorKind::Ratio) {
            const std::vector<double> row{ratio_score(s)};
            proba = predict_proba(model, std::span<const double>(row));
          } else {
            proba = predict_proba(model, featurize(s));
          }
          std::cout << ojson{{"session_id", s.session_id},
                             {"proba", proba},
                             {"predicted", proba >= model.config.threshold ? "second"
                                                                          : "first"}}
                           .dump()
                    << '\n';
        }
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
