// Command-line driver for the reduced-model pipeline: ensemble sampling,
// density fitting, noise/kernel construction, truth and estimate runs, and
// error comparison. Exit codes: 0 success, 1 usage/config error,
// 2 acceptance ordering violated, 3 numerical failure.

#include <CLI11.hpp>
#include <iostream>

#include "ksmz/parallel.hpp"
#include "ksmz/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  long seed_override = -1;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file")->required();
  cmd->add_option("--seed", opts.seed_override, "override the master seed");
  cmd->add_option("--out", opts.out_override, "override the output directory");
  cmd->add_option("--jobs", opts.jobs, "worker threads (default: hardware)");
}

ksmz::ExperimentConfig load_config(const CommonOpts& opts) {
  ksmz::ExperimentConfig cfg = ksmz::ExperimentConfig::load(ksmz::Config::parse_file(opts.config_path));
  if (opts.seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(opts.seed_override);
  if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
  return cfg;
}

int jobs_of(const CommonOpts& opts) { return opts.jobs > 0 ? opts.jobs : ksmz::default_jobs(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mori-Zwanzig short-memory reduced models for the truncated Kuramoto-Sivashinsky equation"};
  app.require_subcommand(1);

  CommonOpts sample_o, fit_o, autocorr_o, noise_o, kernel_o, truth_o, estimate_o, compare_o;
  std::string estimate_variant;
  std::string compare_truth;
  std::vector<std::string> compare_estimates;

  add_common(app.add_subcommand("sample", "integrate the uniform-IC ensemble and record samples"), sample_o);
  add_common(app.add_subcommand("fit-density", "maximum-likelihood diagonal Gaussian from samples"), fit_o);
  add_common(app.add_subcommand("autocorr", "unresolved-mode autocorrelations from density draws"),
             autocorr_o);
  add_common(app.add_subcommand("noise-model", "moving-average weights from the autocorrelations"),
             noise_o);
  add_common(app.add_subcommand("kernel", "Monte-Carlo memory-kernel estimation"), kernel_o);
  add_common(app.add_subcommand("truth", "ensemble-averaged full system, resolved modes"), truth_o);
  auto* est = app.add_subcommand("estimate", "averaged reduced-model runs");
  add_common(est, estimate_o);
  est->add_option("--variant", estimate_variant, "galerkin | short-memory | delta (default: config)");
  auto* cmp = app.add_subcommand("compare", "error report of estimates against truth");
  add_common(cmp, compare_o);
  cmp->add_option("--truth", compare_truth, "truth CSV (default: [paths] truth)");
  cmp->add_option("estimates", compare_estimates, "name=path estimate CSVs")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("sample")) {
      ksmz::cmd_sample(load_config(sample_o), jobs_of(sample_o));
    } else if (app.got_subcommand("fit-density")) {
      ksmz::cmd_fit_density(load_config(fit_o));
    } else if (app.got_subcommand("autocorr")) {
      ksmz::cmd_autocorr(load_config(autocorr_o), jobs_of(autocorr_o));
    } else if (app.got_subcommand("noise-model")) {
      ksmz::cmd_noise_model(load_config(noise_o));
    } else if (app.got_subcommand("kernel")) {
      ksmz::cmd_kernel(load_config(kernel_o), jobs_of(kernel_o));
    } else if (app.got_subcommand("truth")) {
      ksmz::cmd_truth(load_config(truth_o), jobs_of(truth_o));
    } else if (app.got_subcommand("estimate")) {
      const ksmz::ExperimentConfig cfg = load_config(estimate_o);
      const auto variant =
          estimate_variant.empty() ? cfg.reduced.variant : ksmz::parse_variant(estimate_variant);
      ksmz::cmd_estimate(cfg, variant, jobs_of(estimate_o));
    } else if (app.got_subcommand("compare")) {
      const ksmz::ExperimentConfig cfg = load_config(compare_o);
      const std::string truth_path = compare_truth.empty() ? cfg.file("truth") : compare_truth;
      std::vector<std::pair<std::string, std::string>> named;
      for (const std::string& e : compare_estimates) {
        const auto eq = e.find('=');
        if (eq == std::string::npos) {
          std::cerr << "compare: estimates must be name=path\n";
          return 1;
        }
        named.emplace_back(e.substr(0, eq), e.substr(eq + 1));
      }
      const ksmz::ErrorReport report = ksmz::cmd_compare(cfg, truth_path, named);
      for (const auto& ve : report.variants) {
        std::cout << ve.name << ": total " << ve.total;
        for (const auto& [k, l2] : ve.mode_l2) std::cout << "  k" << k << " " << l2;
        std::cout << '\n';
      }
      if (report.ordering_checked && !report.ordering_holds) {
        std::cerr << "ordering violated: short-memory error is not below galerkin\n";
        return 2;
      }
    }
  } catch (const ksmz::BdfFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const std::string what = e.what();
    return what.find("blow-up") != std::string::npos ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
