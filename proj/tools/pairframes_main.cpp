// pairframes: nested pairwise evaluation of a model against an annotator panel.
//
// Usage:
//   pairframes evaluate --manifest data/manifest.json --out results --task cell_class
//   pairframes simulate --config panel.json --out data
//   pairframes validate --manifest data/manifest.json

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pairframes/dataset.hpp"
#include "pairframes/error.hpp"
#include "pairframes/report.hpp"
#include "pairframes/simgen.hpp"

namespace {

std::vector<pf::Metric> split_metrics(const std::string& list) {
  std::vector<pf::Metric> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(pf::parse_metric(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested pairwise frames evaluation"};
  app.require_subcommand(1);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Benchmark the model against the panel");
  std::string manifest, out_dir, task = "cell_class", metrics, threshold_unit = "micron";
  std::string resample = "hierarchical", test = "noninferiority", undefined_policy = "exclude";
  double threshold = 7.5, alpha = 0.05, margin = 0.05;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool report_background = false, dump_confusions = false;

  evaluate->add_option("--manifest", manifest, "Dataset manifest (JSON)")->required();
  evaluate->add_option("--out", out_dir, "Output directory")->required();
  evaluate->add_option("--task", task, "tissue | cell_class | cell_count")
      ->check(CLI::IsMember({"tissue", "cell_class", "cell_count"}));
  evaluate->add_option("--metrics", metrics, "Comma-separated: precision,recall,f1 or icc");
  evaluate->add_flag("--report-background", report_background, "Also report the background class");
  evaluate->add_option("--match-threshold", threshold, "Cell matching distance threshold")->capture_default_str();
  evaluate->add_option("--match-threshold-unit", threshold_unit, "px | micron")
      ->check(CLI::IsMember({"px", "micron"}))
      ->capture_default_str();
  evaluate->add_option("--undefined-policy", undefined_policy, "exclude | zero | one")
      ->check(CLI::IsMember({"exclude", "zero", "one"}))
      ->capture_default_str();
  evaluate->add_option("--bootstrap-replicates", replicates, "Bootstrap replicates")->capture_default_str();
  evaluate->add_option("--alpha", alpha, "Two-sided CI level is 1 - alpha")->capture_default_str();
  evaluate->add_option("--resample", resample, "hierarchical | frames | slides")
      ->check(CLI::IsMember({"hierarchical", "frames", "slides"}))
      ->capture_default_str();
  evaluate->add_option("--seed", seed, "Master seed")->capture_default_str();
  evaluate->add_option("--margin", margin, "Margin on the mean difference")->capture_default_str();
  evaluate->add_option("--test", test, "noninferiority | equivalence | superiority")
      ->check(CLI::IsMember({"noninferiority", "equivalence", "superiority"}))
      ->capture_default_str();
  evaluate->add_flag("--dump-confusions", dump_confusions, "Write pair-aggregated confusion matrices");
  evaluate->add_option("--threads", threads, "Bootstrap worker threads")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic panel");
  std::string config_path, sim_out;
  simulate->add_option("--config", config_path, "Panel config (JSON)")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "Check a dataset against its invariants");
  std::string validate_manifest;
  validate->add_option("--manifest", validate_manifest, "Dataset manifest (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) {
      pf::RunConfig cfg;
      cfg.task = pf::parse_task(task);
      cfg.metrics = split_metrics(metrics);
      cfg.match_threshold = {threshold, threshold_unit == "px" ? pf::ThresholdUnit::px : pf::ThresholdUnit::micron};
      cfg.report_background = report_background;
      cfg.undefined_policy = pf::parse_undefined_policy(undefined_policy);
      cfg.resample = {pf::parse_resample_strategy(resample), replicates, alpha, seed};
      cfg.margin = margin;
      cfg.test_mode = pf::parse_test_mode(test);
      cfg.manifest = manifest;
      cfg.output_dir = out_dir;
      cfg.dump_confusions = dump_confusions;
      cfg.threads = threads;
      return pf::run_evaluate(cfg, std::cerr);
    }
    if (*simulate) {
      const auto panel = pf::generate_panel(pf::load_panel_config(config_path));
      pf::write_panel(panel, sim_out);
      for (const auto& w : panel.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << panel.dataset.frames.size() << " frames to " << sim_out << "\n";
      return 0;
    }
    if (*validate) {
      const auto loaded = pf::load_manifest(validate_manifest);
      for (const auto& w : loaded.warnings) std::cout << "warning: " << w << "\n";
      for (const auto& v : loaded.report.violations) {
        std::cout << "violation: " << v.rule << " [frame '" << v.frame_id << "', annotator '" << v.annotator_id
                  << "']\n";
      }
      std::cout << loaded.dataset.frames.size() << " frames retained, " << loaded.report.size() << " violation(s)\n";
      return loaded.report.empty() ? 0 : 1;
    }
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
