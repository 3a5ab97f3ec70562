#include "gpa/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpa/cluster.hpp"
#include "gpa/csv.hpp"
#include "gpa/experiments.hpp"
#include "gpa/grid.hpp"
#include "gpa/model_io.hpp"
#include "gpa/synthdata.hpp"

namespace gpa {

namespace {

// =============================================================================
// Shared option blocks
// =============================================================================

// Where the sample comes from: a CSV on disk, or a generated setting.
struct DataOpts {
  std::string input;
  std::string setting = "1";
  std::int64_t n = 10000;
  double sigma = 1.0;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input,
                    "sample CSV (columns x[,x2,...],y[,mu_true]); "
                    "overrides --setting");
    cmd->add_option("--setting", setting, "built-in setting: 1..4 or mu3")
        ->capture_default_str();
    cmd->add_option("--n", n, "generated sample size")->capture_default_str();
    cmd->add_option("--sigma", sigma, "generated noise standard deviation")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "generation seed")->capture_default_str();
  }

  SampleFile acquire() const {
    if (!input.empty()) return read_sample_csv(input);
    SimSetting s = SimSetting::from_name(setting);
    s.sigma = sigma;
    SimData d = generate(s, n, seed);
    return SampleFile{std::move(d.sample), std::move(d.truth)};
  }
};

struct ClusterOpts {
  int machines = 50;
  std::string partition = "random";

  void attach(CLI::App* cmd) {
    cmd->add_option("--machines", machines, "machine count M")
        ->capture_default_str();
    cmd->add_option("--partition", partition, "partition strategy: random|sorted")
        ->capture_default_str();
  }

  Cluster build(const Sample& sample, std::uint64_t seed) const {
    return Cluster(sample,
                   make_partition(sample, partition_strategy_from_name(partition),
                                  machines,
                                  seed + config::kPartitionSeedOffset));
  }
};

struct BandwidthOpts {
  std::string method;  // empty: no data-driven selection
  double trim = config::kDefaultTrim;
  double span = config::kCandidateSpan;
  int count = config::kCandidateCount;
  double exponent = config::kDefaultRateExponent;
  std::int64_t pilot_size = 1000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--bandwidth-method", method,
                    "data-driven selector: oneshot|pilot");
    cmd->add_option("--trim", trim, "CV boundary trim fraction")
        ->capture_default_str();
    cmd->add_option("--span", span, "candidate interval half-span factor")
        ->capture_default_str();
    cmd->add_option("--candidates", count, "candidate count")
        ->capture_default_str();
    cmd->add_option("--rate-exponent", exponent, "bandwidth rate exponent e")
        ->capture_default_str();
    cmd->add_option("--pilot-size", pilot_size, "pilot sample size n0")
        ->capture_default_str();
  }

  BandwidthOptions options(std::uint64_t seed) const {
    BandwidthOptions o;
    o.trim = trim;
    o.span = span;
    o.count = count;
    o.exponent = exponent;
    o.pilot_size = pilot_size;
    o.pilot_seed = seed + config::kPilotSeedOffset;
    return o;
  }
};

struct GridOpts {
  double multiplier = 1.0;
  std::int64_t segments = 0;  // 0: design formula
  std::string support = "compact";
  double lo = std::numeric_limits<double>::quiet_NaN();  // default: data range
  double hi = std::numeric_limits<double>::quiet_NaN();

  void attach(CLI::App* cmd) {
    cmd->add_option("--grid-multiplier", multiplier,
                    "grid-count multiplier c")
        ->capture_default_str();
    cmd->add_option("--segments", segments,
                    "fixed grid segment count J (0: use the design formula)")
        ->capture_default_str();
    cmd->add_option("--support", support, "support mode: compact|diverging")
        ->capture_default_str();
    cmd->add_option("--lo", lo, "grid lower bound (default: data minimum)");
    cmd->add_option("--hi", hi, "grid upper bound (default: data maximum)");
  }

  Grid build(const Sample& sample, bool generated, double h) const {
    const SupportMode mode = support_mode_from_name(support);
    double a = lo, b = hi;
    if (std::isnan(a)) a = generated ? 0.0 : sample.min_x();
    if (std::isnan(b)) b = generated ? 1.0 : sample.max_x();
    if (segments > 0) return Grid(a, b, segments, mode);
    return design_grid(sample.size(), h, mode, a, b, multiplier);
  }
};

void print_ledger(const CostLedger& ledger, const std::string& path) {
  std::ostringstream text;
  for (const auto& [key, value] : ledger.report())
    text << key << '=' << value << '\n';
  std::cout << text.str();
  if (!path.empty()) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text.str();
    if (!out) throw IoError("write to '" + path + "' failed");
  }
}

void merge_phase(PhaseCost& acc, const PhaseCost& c) {
  acc.values_sent_to_coordinator += c.values_sent_to_coordinator;
  acc.values_broadcast_to_workers += c.values_broadcast_to_workers;
  acc.worker_flops_proxy += c.worker_flops_proxy;
  acc.coordinator_flops_proxy += c.coordinator_flops_proxy;
  acc.round_trips += c.round_trips;
  acc.wall_seconds += c.wall_seconds;
}

void merge_ledger(CostLedger& acc, const CostLedger& l) {
  merge_phase(acc.train, l.train);
  merge_phase(acc.bandwidth, l.bandwidth);
  merge_phase(acc.predict, l.predict);
}

// =============================================================================
// simulate
// =============================================================================

struct SimulateCmd {
  std::string setting = "1";
  std::int64_t n = 10000;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate",
                                   "generate a benchmark sample as CSV");
    cmd->set_help_flag("--help", "print help and exit");
    cmd->add_option("--setting", setting, "built-in setting: 1..4 or mu3")
        ->capture_default_str();
    cmd->add_option("--n", n, "sample size")->capture_default_str();
    cmd->add_option("--sigma", sigma, "noise standard deviation")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "generation seed")->capture_default_str();
    cmd->add_option("--out", out, "output CSV path")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    SimSetting s = SimSetting::from_name(setting);
    s.sigma = sigma;
    const SimData d = generate(s, n, seed);
    write_sample_csv(out, d.sample, d.truth);
    std::cout << "wrote " << d.sample.size() << " rows to " << out << '\n';
  }
};

// =============================================================================
// fit
// =============================================================================

struct FitCmd {
  DataOpts data;
  ClusterOpts cluster;
  BandwidthOpts bandwidth;
  GridOpts grid;
  double h = 0.0;
  int nu = 1;
  std::string out;
  std::string ledger_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "fit", "train a grid model on a cluster and persist it");
    cmd->set_help_flag("--help", "print help and exit");
    data.attach(cmd);
    cluster.attach(cmd);
    bandwidth.attach(cmd);
    grid.attach(cmd);
    cmd->add_option("--h", h, "fixed bandwidth (otherwise --bandwidth-method)");
    cmd->add_option("--nu", nu, "interpolation order")->capture_default_str();
    cmd->add_option("--out", out, "model file path")->required();
    cmd->add_option("--ledger", ledger_path, "also write the ledger here");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const SampleFile file = data.acquire();
    const Cluster cl = cluster.build(file.sample, data.seed);
    const KernelSpec kernel = kernel_for_order(nu);

    CostLedger ledger;
    double used_h = h;
    if (!(used_h > 0.0)) {
      if (bandwidth.method.empty())
        throw std::invalid_argument(
            "fit: give --h or pick a --bandwidth-method");
      BandwidthResult sel =
          run_bandwidth(bandwidth_method_from_name(bandwidth.method), cl,
                        kernel, bandwidth.options(data.seed));
      used_h = sel.h;
      ledger.bandwidth = sel.ledger.bandwidth;
    }

    const Grid axis = grid.build(file.sample, data.input.empty(), used_h);
    ModelMeta meta;
    meta.fitted_at = fitted_at_timestamp();
    TrainResult train = run_train(Strategy::Gpa, cl, kernel, used_h, &axis, nu,
                                  std::move(meta));
    ledger.train = train.ledger.train;

    // Degenerate (empty-window) grid points leave holes in the model; name
    // them so the bandwidth/grid mismatch is visible at fit time.
    const GpaModel& model = *train.model;
    for (std::size_t j = 0; j < model.undefined.size(); ++j)
      if (model.undefined[j])
        std::cerr << "warning: grid point " << j << " at x="
                  << format_double(model.axis.point(static_cast<std::int64_t>(
                         j % static_cast<std::size_t>(model.axis.point_count()))))
                  << " has no observations within h; stored as undefined\n";

    save_model(out, model);
    std::cout << "h=" << format_double(used_h) << '\n'
              << "segments=" << axis.segments() << '\n'
              << "model=" << out << '\n';
    print_ledger(ledger, ledger_path);
  }
};

// =============================================================================
// predict
// =============================================================================

struct PredictCmd {
  std::string model_path;
  std::string points_path;
  std::string out;
  std::string ledger_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "predict", "serve predictions from a persisted model");
    cmd->set_help_flag("--help", "print help and exit");
    cmd->add_option("--model", model_path, "model file")->required();
    cmd->add_option("--points", points_path, "query points CSV")->required();
    cmd->add_option("--out", out, "predictions CSV path")->required();
    cmd->add_option("--ledger", ledger_path, "also write the ledger here");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const GpaModel model = load_model(model_path);
    const std::vector<double> points = read_points_csv(points_path, model.dim);
    const std::int64_t nq =
        static_cast<std::int64_t>(points.size()) / model.dim;

    std::vector<Estimate> estimates(static_cast<std::size_t>(nq));
    PredictFlags flags;
    for (std::int64_t q = 0; q < nq; ++q) {
      if (model.dim == 1)
        estimates[static_cast<std::size_t>(q)] =
            predict(model, points[static_cast<std::size_t>(q)], &flags);
      else
        estimates[static_cast<std::size_t>(q)] = predict_multi(
            model, std::span<const double>(points).subspan(
                       static_cast<std::size_t>(q * model.dim),
                       static_cast<std::size_t>(model.dim)));
    }
    write_predictions_csv(out, points, model.dim, estimates);

    // Serving is coordinator-only: every communication counter stays zero.
    CostLedger ledger;
    ledger.predict.coordinator_flops_proxy =
        nq * (model.dim == 1 ? model.nu + 1 : model.dim + 1);
    std::cout << "predictions=" << out << '\n'
              << "flags.clamped=" << flags.clamped << '\n'
              << "flags.out_of_range=" << flags.out_of_range << '\n';
    print_ledger(ledger, ledger_path);
  }
};

// =============================================================================
// bandwidth
// =============================================================================

struct BandwidthCmd {
  DataOpts data;
  ClusterOpts cluster;
  BandwidthOpts bandwidth;
  std::string ledger_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "bandwidth", "run a distributed bandwidth selector");
    cmd->set_help_flag("--help", "print help and exit");
    data.attach(cmd);
    cluster.attach(cmd);
    bandwidth.attach(cmd);
    cmd->add_option("--ledger", ledger_path, "also write the ledger here");
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (bandwidth.method.empty())
      throw std::invalid_argument("bandwidth: --bandwidth-method is required");
    const SampleFile file = data.acquire();
    const Cluster cl = cluster.build(file.sample, data.seed);
    const BandwidthResult sel =
        run_bandwidth(bandwidth_method_from_name(bandwidth.method), cl,
                      KernelSpec::epanechnikov(), bandwidth.options(data.seed));

    std::cout << "h=" << format_double(sel.h) << '\n';
    for (std::size_t m = 0; m < sel.local_selections.size(); ++m)
      std::cout << "local_h." << m << '='
                << format_double(sel.local_selections[m]) << '\n';
    if (sel.pilot)
      std::cout << "pilot_h=" << format_double(sel.pilot->pilot_h) << '\n';
    print_ledger(sel.ledger, ledger_path);
  }
};

// =============================================================================
// bench
// =============================================================================

struct BenchCmd {
  std::string setting = "1";
  std::int64_t n = 10000;
  std::int64_t n_test = 5000;
  double sigma = 1.0;
  int machines = 50;
  int reps = 10;
  std::string partition = "random";
  std::string strategies = "global,oneshot,gpa";
  BandwidthOpts bandwidth;
  double h = 0.0;  // 0: reference bandwidth (or data-driven when method set)
  double grid_multiplier = 1.0;
  int nu = 1;
  std::uint64_t seed = 1;
  std::string out_dir;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "bench", "replicated estimator comparison tables");
    cmd->set_help_flag("--help", "print help and exit");
    cmd->add_option("--setting", setting, "built-in setting: 1..4 or mu3")
        ->capture_default_str();
    cmd->add_option("--n", n, "training size N")->capture_default_str();
    cmd->add_option("--n-test", n_test, "testing size")->capture_default_str();
    cmd->add_option("--sigma", sigma, "noise standard deviation")
        ->capture_default_str();
    cmd->add_option("--machines", machines, "machine count M")
        ->capture_default_str();
    cmd->add_option("--reps", reps, "replications B")->capture_default_str();
    cmd->add_option("--partition", partition,
                    "partition strategy: random|sorted")
        ->capture_default_str();
    cmd->add_option("--strategies", strategies,
                    "comma list from {global,oneshot,gpa}")
        ->capture_default_str();
    bandwidth.attach(cmd);
    cmd->add_option("--h", h,
                    "fixed bandwidth (default: reference h, or the "
                    "selector when --bandwidth-method is given)");
    cmd->add_option("--grid-multiplier", grid_multiplier,
                    "grid-count multiplier c")
        ->capture_default_str();
    cmd->add_option("--nu", nu, "interpolation order")->capture_default_str();
    cmd->add_option("--seed", seed, "base seed; reps use seed..seed+B-1")
        ->capture_default_str();
    cmd->add_option("--out-dir", out_dir, "directory for table files");
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (reps < 1) throw std::invalid_argument("bench: need --reps >= 1");
    SimSetting sim = SimSetting::from_name(setting);
    sim.sigma = sigma;
    const PartitionStrategy part = partition_strategy_from_name(partition);

    bool want_global = false, want_oneshot = false, want_gpa = false;
    std::stringstream list(strategies);
    for (std::string tok; std::getline(list, tok, ',');) {
      switch (strategy_from_name(tok)) {
        case Strategy::GlobalAssembled: want_global = true; break;
        case Strategy::OneShot: want_oneshot = true; break;
        case Strategy::Gpa: want_gpa = true; break;
      }
    }
    if (!want_global && !want_oneshot && !want_gpa)
      throw std::invalid_argument("bench: empty --strategies");

    // Reference bandwidth: the weighted-AMISE optimum on the trimmed
    // support. Needed as the fixed default and as the MRAE yardstick.
    const bool select = !bandwidth.method.empty();
    double h_ref = 0.0;
    if (select || !(h > 0.0)) {
      const WeightFn weight{sim.support_lo(), sim.support_hi(),
                            bandwidth.trim};
      h_ref = amise_reference_bandwidth(sim, kernel_for_order(nu), weight, n);
    }

    std::vector<std::optional<double>> r_global, r_oneshot, r_gpa;
    std::vector<double> selected;
    std::int64_t na_runs = 0, grid_segments = 0;
    CostLedger totals_global, totals_oneshot, totals_gpa;

    for (int b = 0; b < reps; ++b) {
      const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(b);
      double rep_h = h > 0.0 ? h : h_ref;
      if (select) {
        BandwidthTrialConfig bw;
        bw.setting = sim;
        bw.n = n;
        bw.machines = machines;
        bw.partition = part;
        bw.method = bandwidth_method_from_name(bandwidth.method);
        bw.options = bandwidth.options(rep_seed);
        bw.seed = rep_seed;
        rep_h = run_bandwidth_trial(bw);
        selected.push_back(rep_h);
      }

      TrialConfig cfg;
      cfg.setting = sim;
      cfg.n_train = n;
      cfg.n_test = n_test;
      cfg.machines = machines;
      cfg.partition = part;
      cfg.h = rep_h;
      cfg.grid_multiplier = grid_multiplier;
      cfg.nu = nu;
      cfg.seed = rep_seed;
      cfg.run_global = want_global;
      cfg.run_oneshot = want_oneshot;
      cfg.run_gpa = want_gpa;
      const TrialResult r = run_trial(cfg);

      if (want_global) r_global.push_back(r.rmse_global);
      if (want_oneshot) {
        r_oneshot.push_back(r.rmse_oneshot);
        if (!r.rmse_oneshot.has_value()) ++na_runs;
      }
      if (want_gpa) {
        r_gpa.push_back(r.rmse_gpa);
        grid_segments = r.grid_segments;
      }
      merge_ledger(totals_global, r.ledger_global);
      merge_ledger(totals_oneshot, r.ledger_oneshot);
      merge_ledger(totals_gpa, r.ledger_gpa);
    }

    emit(want_global, want_oneshot, want_gpa, r_global, r_oneshot, r_gpa,
         selected, h_ref, na_runs, grid_segments, totals_global,
         totals_oneshot, totals_gpa);
  }

 private:
  struct Stat {
    std::optional<double> mean;
    double se = 0.0;
    std::int64_t used = 0;
  };

  static Stat summarize(const std::vector<std::optional<double>>& xs) {
    Stat s;
    s.mean = mean_defined(xs);
    if (!s.mean) return s;
    long double ss = 0.0L;
    for (const auto& x : xs) {
      if (!x) continue;
      const double d = *x - *s.mean;
      ss += static_cast<long double>(d) * d;
      ++s.used;
    }
    if (s.used > 1)
      s.se = std::sqrt(static_cast<double>(ss) /
                       (static_cast<double>(s.used - 1) *
                        static_cast<double>(s.used)));
    return s;
  }

  static std::string cell(const Stat& s) {
    if (!s.mean) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f (%.4f)", *s.mean, s.se);
    return buf;
  }

  void emit(bool want_global, bool want_oneshot, bool want_gpa,
            const std::vector<std::optional<double>>& r_global,
            const std::vector<std::optional<double>>& r_oneshot,
            const std::vector<std::optional<double>>& r_gpa,
            const std::vector<double>& selected, double h_ref,
            std::int64_t na_runs, std::int64_t grid_segments,
            const CostLedger& totals_global, const CostLedger& totals_oneshot,
            const CostLedger& totals_gpa) const {
    // Machine-readable rows, fixed column order: global, one-shot, grid.
    std::ostringstream csv, txt;
    csv << "strategy,rmse_mean,rmse_se,used_reps,na_runs\n";
    txt << "setting " << setting << "  N=" << n << "  N*=" << n_test
        << "  M=" << machines << "  B=" << reps << "  J=" << grid_segments
        << '\n';
    const auto row = [&](const char* name,
                         const std::vector<std::optional<double>>& xs,
                         std::int64_t na) {
      const Stat s = summarize(xs);
      csv << name << ',' << (s.mean ? format_double(*s.mean) : "NA") << ','
          << format_double(s.se) << ',' << s.used << ',' << na << '\n';
      txt << "  " << name << ": " << cell(s);
      if (na > 0) txt << "  [NA runs: " << na << "]";
      txt << '\n';
    };
    if (want_global) row("global", r_global, 0);
    if (want_oneshot) row("oneshot", r_oneshot, na_runs);
    if (want_gpa) row("gpa", r_gpa, 0);

    std::ostringstream bw;
    if (!selected.empty()) {
      const double err = mrae(selected, h_ref);
      long double acc = 0.0L;
      for (double v : selected) acc += v;
      const double mean_h =
          static_cast<double>(acc / static_cast<long double>(selected.size()));
      bw << "method,h_ref,mrae,mean_h\n"
         << bandwidth.method << ',' << format_double(h_ref) << ','
         << format_double(err) << ',' << format_double(mean_h) << '\n';
      txt << "  bandwidth " << bandwidth.method << ": MRAE "
          << format_double(err) << " vs h_ref " << format_double(h_ref)
          << '\n';
    }

    std::ostringstream ledger;
    const auto ledger_rows = [&](const char* name, const CostLedger& l) {
      for (const auto& [key, value] : l.report())
        ledger << name << '.' << key << '=' << value << '\n';
    };
    if (want_global) ledger_rows("global", totals_global);
    if (want_oneshot) ledger_rows("oneshot", totals_oneshot);
    if (want_gpa) ledger_rows("gpa", totals_gpa);

    std::cout << txt.str();
    if (!out_dir.empty()) {
      const auto dump = [&](const std::string& name, const std::string& body) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out << body;
        if (!out) throw IoError("write to '" + path + "' failed");
      };
      dump("bench_rmse.csv", csv.str());
      dump("bench_rmse.txt", txt.str());
      dump("bench_ledger.txt", ledger.str());
      if (!selected.empty()) dump("bench_bandwidth.csv", bw.str());
    }
  }
};

}  // namespace

int run_cli(int argc, char** argv) {
  SimulateCmd simulate;
  FitCmd fit;
  PredictCmd predict;
  BandwidthCmd bandwidth;
  BenchCmd bench;

  CLI::App app{"grid-point kernel regression toolkit"};
  // `--h` is the bandwidth everywhere, so help lives on --help alone.
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file (flags override)");
  simulate.attach(app);
  fit.attach(app);
  predict.attach(app);
  bandwidth.attach(app);
  bench.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gpa
