// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
// (indented lines are detail) and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "cli.hpp"
#include "coopgrow/config.hpp"
#include "coopgrow/field.hpp"
#include "coopgrow/fitting.hpp"
#include "coopgrow/metrics.hpp"
#include "coopgrow/parallel.hpp"
#include "coopgrow/scenario.hpp"

using namespace coopgrow;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = COOPGROW_SOURCE_DIR "/configs/";

// Tolerances and targets.
constexpr std::size_t kCoopSamples = 10000;
constexpr double kJacobianRelTol = 1e-5;
constexpr double kC1Seconds = 10.0;
constexpr double kC2Seconds = 60.0;
constexpr double kDoseMax = 0.3;
constexpr double kMeanLo = 35.0;
constexpr double kMeanHi = 50.0;
constexpr std::uint64_t kSeeds = 10;
constexpr double kIdealVarianceRatio = 0.5;
constexpr double kIdealFraction = 0.95;
constexpr double kNitrogenBand = 0.02;
constexpr double kNoisyMargin = 0.05;
constexpr double kSparseFraction = 0.95;
constexpr double kNoisyFraction = 0.92;
constexpr double kReducedNitrogen = 0.955;
constexpr double kReducedFraction = 0.89;
constexpr double kRecoveryRelTol = 0.05;
constexpr double kRecoveryNrmse = 0.02;
constexpr double kNoisyMedianNrmse = 0.15;
constexpr double kFitSeconds = 300.0;
constexpr double kFidelityStep = 0.05;
constexpr double kEulerStep = 0.0005;
constexpr double kEulerRelTol = 1e-4;
constexpr double kHalvingRelTol = 1e-6;

const std::size_t kThreads = std::max(1u, std::thread::hardware_concurrency());

int failures = 0;

void verdict(int id, bool pass, const std::string& text)
{
    std::cout << fmt::format("[{}] criterion {:>2}: {}\n", pass ? "PASS" : "FAIL", id, text) << std::flush;
    failures += pass ? 0 : 1;
}

void detail(const std::string& text) { std::cout << "        " << text << '\n'; }

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig scenario(const std::string& name, std::uint64_t seed)
{
    return load_scenario(kConfigs + name + ".cfg", {{"field.seed", std::to_string(seed)}});
}

std::vector<double> linear_grid(double hi, std::size_t n)
{
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = hi * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

// Worst FD disagreement over 100 random interior states, five-point stencil.
double jacobian_fd_error()
{
    const PlantParams p = PlantParams::nominal();
    std::mt19937_64 gen(12345);
    auto lu = [&](double lo, double hi) {
        return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(gen));
    };
    auto arr = [](const StateDerivative& d) { return std::array<double, 3>{d.db, d.dc, d.dn}; };
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const PlantState s{lu(1e-2, 100), lu(1e-4, 10), lu(1e-5, 1)};
        const EnvPoint env{lu(2, 40), lu(1, 1000)};
        const double u = lu(1e-3, 0.5);
        const Matrix3 J = jacobian_state(s, u, env, p);
        const std::array<double, 3> x{s.b, s.c, s.n};
        for (std::size_t k = 0; k < 3; ++k) {
            auto at = [&](double h) {
                std::array<double, 3> y = x;
                y[k] += h;
                return arr(rhs({y[0], y[1], y[2]}, u, env, p));
            };
            const double h = 1e-3 * x[k];
            const auto f1 = at(h), f2 = at(2 * h), m1 = at(-h), m2 = at(-2 * h);
            for (std::size_t r = 0; r < 3; ++r) {
                const double fd = (8 * (f1[r] - m1[r]) - (f2[r] - m2[r])) / (12 * h);
                double row = 0.0;
                for (std::size_t c = 0; c < 3; ++c) row = std::max(row, std::abs(J[r][c]) * x[c]);
                const double scale = std::max(std::abs(J[r][k]), 1e-6 * row / x[k]);
                worst = std::max(worst, std::abs(J[r][k] - fd) / scale);
            }
        }
        const Vector3 Ju = jacobian_input(s, u, env, p);
        const double hu = 1e-3 * u;
        const double fd = (8 * (arr(rhs(s, u + hu, env, p))[2] - arr(rhs(s, u - hu, env, p))[2]) -
                           (arr(rhs(s, u + 2 * hu, env, p))[2] - arr(rhs(s, u - 2 * hu, env, p))[2])) /
                          (12 * hu);
        worst = std::max(worst, std::abs(Ju[2] - fd) / std::abs(Ju[2]));
    }
    return worst;
}

void criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = load_scenario(kConfigs + "uncontrolled.cfg");
    std::size_t violations = 0;
    double min_off = INFINITY;
    for (const EnvPoint& env : cfg.field.env.values()) {
        const CooperativityReport rep = check_cooperativity(PlantParams::nominal(), env, kCoopSamples, 1);
        violations += rep.violation_count;
        min_off = std::min(min_off, rep.min_offdiagonal);
    }
    std::ostringstream out, err;
    const int code = cli::run({"verify-monotone", "--config", kConfigs + "uncontrolled.cfg", "--samples",
                               std::to_string(kCoopSamples), "--threads", std::to_string(kThreads)},
                              out, err);
    const double fd = jacobian_fd_error();
    const double secs = seconds_since(t0);
    detail(fmt::format("{} samples: {} violations, min off-diagonal {:.3g}; verify-monotone exit {}", kCoopSamples,
                       violations, min_off, code));
    detail(fmt::format("worst analytic vs finite-difference relative error {:.2e} (limit {:.0e})", fd,
                       kJacobianRelTol));
    verdict(1, violations == 0 && code == 0 && fd <= kJacobianRelTol && secs < kC1Seconds,
            fmt::format("cooperativity: zero Kamke violations, Jacobians match FD ({:.2f} s, limit {:.0f} s)", secs,
                        kC1Seconds));
}

void criterion2()
{
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = load_scenario(kConfigs + "uncontrolled.cfg");
    std::vector<PlantParams> sets;
    for (std::size_t i = 0; i < 10; ++i) sets.push_back(sample_params(PlantParams::nominal(), 0.05, cfg.field.seed, i));
    const DoseResponseTable t = dose_response_sweep(sets, linear_grid(kDoseMax, 20), cfg.field.s0, cfg.field.env,
                                                    cfg.field.dt, 50.0, kThreads);
    const double secs = seconds_since(t0);
    const auto breaks = t.monotonicity_breaks();
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : t.final_b) {
        lo = std::min(lo, row.front());
        hi = std::max(hi, row.back());
    }
    detail(fmt::format("10 sets x 20 levels in [0, {}] g: final b from {:.2f} to {:.2f} g, {} breaks", kDoseMax, lo,
                       hi, breaks.size()));
    verdict(2, breaks.empty() && secs < kC2Seconds,
            fmt::format("dose-response rows monotone ({:.2f} s, limit {:.0f} s)", secs, kC2Seconds));
}

void criterion3()
{
    const ScenarioConfig cfg = load_scenario(kConfigs + "uncontrolled.cfg");
    const FieldTrajectory tr = simulate_field(cfg.field, cfg.policy, cfg.schedule, kThreads);
    const std::size_t per_day = steps_in(1.0, cfg.field.dt);
    const auto days = static_cast<std::size_t>(cfg.field.season_days);
    std::vector<double> mean(days + 1, 0.0);
    bool plants_monotone = true;
    for (const Trajectory& p : tr.plants) {
        for (std::size_t d = 0; d <= days; ++d) {
            mean[d] += p.outputs[d * per_day] / static_cast<double>(tr.plants.size());
            if (d >= 2 && p.outputs[d * per_day] < p.outputs[(d - 1) * per_day]) plants_monotone = false;
        }
    }
    bool mean_monotone = true;
    for (std::size_t d = 2; d <= days; ++d) mean_monotone = mean_monotone && mean[d] >= mean[d - 1];
    // Inflections: sign changes of the second difference, ignoring numerical zeros.
    const double tiny = 1e-9 * mean.back();
    int last_sign = 0;
    int inflections = 0;
    for (std::size_t d = 1; d < days; ++d) {
        const double d2 = mean[d + 1] - 2 * mean[d] + mean[d - 1];
        const int sign = d2 > tiny ? 1 : d2 < -tiny ? -1 : 0;
        if (sign != 0) {
            if (last_sign != 0 && sign != last_sign) ++inflections;
            last_sign = sign;
        }
    }
    const double final_mean = mean.back();
    detail(fmt::format("mean final shoot biomass {:.2f} g (target [{}, {}]); mean at days 10/20/30/40: "
                       "{:.2f}/{:.2f}/{:.2f}/{:.2f} g",
                       final_mean, kMeanLo, kMeanHi, mean[10], mean[20], mean[30], mean[40]));
    detail(fmt::format("mean curve monotone after day 1: {}; every plant monotone after day 1: {}; inflections: {}",
                       mean_monotone, plants_monotone, inflections));
    verdict(3, final_mean >= kMeanLo && final_mean <= kMeanHi && mean_monotone && inflections == 1,
            "calibration: uncontrolled mean in range with a single-inflection growth curve");
}

struct SeedRuns {
    ScenarioRun uncontrolled, ideal, sparse, sparse_local, noisy;
    std::vector<ScenarioRun> reduced;
};

const char* kReduced[] = {"ideal_reduced", "sparse_reduced", "sparse_local_reduced", "sparse_local_noisy_reduced"};

std::vector<SeedRuns> run_seeds()
{
    std::vector<SeedRuns> out;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        SeedRuns r;
        r.uncontrolled = run_scenario(scenario("uncontrolled", seed), kThreads);
        r.ideal = run_scenario(scenario("ideal", seed), kThreads);
        r.sparse = run_scenario(scenario("sparse", seed), kThreads);
        r.sparse_local = run_scenario(scenario("sparse_local", seed), kThreads);
        r.noisy = run_scenario(scenario("sparse_local_noisy", seed), kThreads);
        for (const char* name : kReduced) r.reduced.push_back(run_scenario(scenario(name, seed), kThreads));
        out.push_back(std::move(r));
    }
    return out;
}

void criterion4(const std::vector<SeedRuns>& runs)
{
    std::size_t ok = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& u = runs[i].uncontrolled.summary;
        const auto& c = runs[i].ideal.summary;
        const double ratio = c.variance / u.variance;
        const bool pass = ratio <= kIdealVarianceRatio && c.fraction_above >= kIdealFraction &&
                          c.threshold == u.threshold;
        ok += pass ? 1 : 0;
        detail(fmt::format("seed {:>2}: variance {:.2f} -> {:.2f} g^2 (ratio {:.3f}), above threshold {:.2f} -> {:.2f}"
                           "  {}",
                           i + 1, u.variance, c.variance, ratio, u.fraction_above, c.fraction_above,
                           pass ? "ok" : "miss"));
    }
    verdict(4, ok == runs.size(),
            fmt::format("ideal control halves variance and lifts fraction-above to >= {} ({}/{} seeds)",
                        kIdealFraction, ok, runs.size()));
}

void criterion5(const std::vector<SeedRuns>& runs)
{
    std::size_t ok = 0;
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : runs) {
        const double ratio = compare(r.uncontrolled.summary, r.ideal.summary).nitrogen_ratio;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ok += std::abs(ratio - 1.0) <= kNitrogenBand ? 1 : 0;
    }
    detail(fmt::format("ideal / uncontrolled nitrogen over {} seeds: {:.4f} .. {:.4f}", runs.size(), lo, hi));
    verdict(5, ok == runs.size(),
            fmt::format("ideal control nitrogen within +/-{:.0f}% of uncontrolled ({}/{} seeds)", kNitrogenBand * 100,
                        ok, runs.size()));
}

void criterion6(const std::vector<SeedRuns>& runs)
{
    std::size_t ok = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        const double vu = r.uncontrolled.summary.variance;
        const double vi = r.ideal.summary.variance;
        const double vs = r.sparse.summary.variance;
        const double vl = r.sparse_local.summary.variance;
        const double vn = r.noisy.summary.variance;
        const double fs = r.sparse.summary.fraction_above;
        const double fl = r.sparse_local.summary.fraction_above;
        const double fn = r.noisy.summary.fraction_above;
        const bool order = vi <= vs && vl <= vn && vn <= (1.0 - kNoisyMargin) * vu;
        const bool fractions = fs >= kSparseFraction && fl >= kSparseFraction && fn >= kNoisyFraction;
        ok += order && fractions ? 1 : 0;
        detail(fmt::format("seed {:>2}: var ideal {:.2f} <= sparse {:.2f}; local {:.2f} <= noisy {:.2f} < 0.95 x "
                           "uncontrolled {:.2f}; above: sparse {:.2f}, local {:.2f}, noisy {:.2f}  {}",
                           i + 1, vi, vs, vl, vn, vu, fs, fl, fn, order && fractions ? "ok" : "miss"));
    }
    verdict(6, ok == runs.size(),
            fmt::format("degradation ordering and sparse/noisy fractions ({}/{} seeds)", ok, runs.size()));
}

void criterion7(const std::vector<SeedRuns>& runs)
{
    std::size_t ok = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        bool pass = true;
        std::string line = fmt::format("seed {:>2}:", i + 1);
        for (std::size_t k = 0; k < runs[i].reduced.size(); ++k) {
            const ScenarioRun& s = runs[i].reduced[k];
            const double ratio = s.comparison ? s.comparison->nitrogen_ratio : 1.0;
            const double frac = s.summary.fraction_above;
            pass = pass && ratio <= kReducedNitrogen && frac >= kReducedFraction;
            line += fmt::format(" {} N {:.4f} above {:.2f};", kReduced[k], ratio, frac);
        }
        ok += pass ? 1 : 0;
        detail(line + (pass ? "  ok" : "  miss"));
    }
    verdict(7, ok == runs.size(),
            fmt::format("reduced u_bar saves >= {:.1f}% nitrogen with fraction-above >= {} ({}/{} seeds)",
                        (1.0 - kReducedNitrogen) * 100, kReducedFraction, ok, runs.size()));
}

void criterion8()
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::array<Param, 3> free{Param::k_l, Param::sigma_c, Param::psi};
    auto run = [&](double noise, std::uint64_t seed) {
        SyntheticSpec syn;
        syn.series_count = 20;
        syn.min_points = syn.max_points = 12;
        syn.noise_frac = noise;
        syn.seed = seed;
        const auto data = generate_synthetic(syn);
        std::vector<FitResult> results(data.size());
        std::vector<FitSpec> specs(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            PlantParams::Values g = data[i].truth.values();
            for (Param p : free) g[static_cast<std::size_t>(p)] *= 1.2;
            specs[i] = FitSpec::defaults(PlantParams(g));
            specs[i].free = FitSpec::mask_of(free);
        }
        parallel_for(data.size(), kThreads, [&](std::size_t i) { results[i] = fit(specs[i], data[i].series); });
        return std::make_pair(data, results);
    };

    const auto [clean, clean_fit] = run(0.0, 101);
    double worst_rel = 0.0;
    double worst_nrmse = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        for (Param p : free) {
            worst_rel = std::max(worst_rel, std::abs(clean_fit[i].params[p] / clean[i].truth[p] - 1.0));
        }
        worst_nrmse = std::max(worst_nrmse, clean_fit[i].nrmse);
    }
    const auto [noisy, noisy_fit] = run(0.05, 202);
    std::vector<double> scores;
    for (const auto& r : noisy_fit) scores.push_back(r.nrmse);
    const double median = percentile(scores, 50.0);
    const double secs = seconds_since(t0);
    detail(fmt::format("noise-free: worst relative parameter error {:.2e} (limit {}), worst NRMSE {:.2e} (limit {})",
                       worst_rel, kRecoveryRelTol, worst_nrmse, kRecoveryNrmse));
    detail(fmt::format("5% noise: median NRMSE {:.4f} (limit {})", median, kNoisyMedianNrmse));
    verdict(8,
            worst_rel <= kRecoveryRelTol && worst_nrmse < kRecoveryNrmse && median < kNoisyMedianNrmse &&
                secs < kFitSeconds,
            fmt::format("fitting recovery on 2 x 20 synthetic series ({:.1f} s, limit {:.0f} s)", secs, kFitSeconds));
}

// Relative gap between two trajectories sampled daily; NaN if either is not finite.
double daily_gap(const Trajectory& a, const std::vector<double>& ref_daily, double dt)
{
    const std::size_t per_day = steps_in(1.0, dt);
    double worst = 0.0;
    for (std::size_t d = 0; d < ref_daily.size(); ++d) {
        const double y = a.outputs[d * per_day];
        if (!std::isfinite(y)) return NAN;
        worst = std::max(worst, std::abs(y - ref_daily[d]) / std::abs(ref_daily[d]));
    }
    return worst;
}

void criterion9()
{
    const PlantParams p = PlantParams::nominal();
    const PlantState s0{0.005, 0.001, 0.0001};
    const EnvSignal env = EnvSignal::constant({22, 500});
    const InputSignal u = InputSignal::constant(0.075);

    // Fine explicit Euler reference, sampled daily.
    auto euler_daily = [&](double h) {
        std::vector<double> y;
        PlantState s = s0;
        const std::size_t per_day = steps_in(1.0, h);
        for (std::size_t d = 0; d <= 50; ++d) {
            y.push_back(output(s, p));
            if (d == 50) break;
            for (std::size_t k = 0; k < per_day; ++k) s = euler_step(s, 0.075, env(0), p, h);
        }
        return y;
    };
    const std::vector<double> euler = euler_daily(kEulerStep);

    // NaN marks a run the integrator rejected.
    auto run = [&](double dt) -> std::optional<Trajectory> {
        try {
            return integrate(p, s0, u, env, 0, 50, dt);
        } catch (const std::exception& e) {
            detail(fmt::format("dt = {}: integration aborted: {}", dt, e.what()));
            return std::nullopt;
        }
    };
    auto assess = [&](double dt) {
        const auto full = run(dt);
        const auto half = run(dt / 2);
        const double gap = full ? daily_gap(*full, euler, dt) : NAN;
        const double halving = full && half ? std::abs(full->final_output() - half->final_output()) /
                                                  std::abs(half->final_output())
                                            : NAN;
        return std::make_pair(gap, halving);
    };

    const auto [gap, halving] = assess(kFidelityStep);
    detail(fmt::format("dt = {}: max daily relative gap to Euler(dt = {}) {:.3e} (limit {:.0e}); halving dt "
                       "changes final y by {:.3e} (limit {:.0e})",
                       kFidelityStep, kEulerStep, gap, kEulerRelTol, halving, kHalvingRelTol));
    const auto [gap_default, halving_default] = assess(kDefaultStep);
    detail(fmt::format("for reference, the shipped step dt = {}: gap {:.3e}, halving change {:.3e}", kDefaultStep,
                       gap_default, halving_default));
    const std::vector<double> finer = euler_daily(kEulerStep / 2);
    double euler_self = 0.0;
    for (std::size_t d = 0; d < finer.size(); ++d) {
        euler_self = std::max(euler_self, std::abs(euler[d] - finer[d]) / std::abs(finer[d]));
    }
    detail(fmt::format("Euler itself moves by {:.3e} when its step is halved to {}", euler_self, kEulerStep / 2));
    const bool pass = std::isfinite(gap) && gap <= kEulerRelTol && std::isfinite(halving) && halving < kHalvingRelTol;
    verdict(9, pass, fmt::format("RK4 at dt = {} matches fine Euler and is step-converged", kFidelityStep));
}

void criterion10()
{
    const std::vector<std::string> names{"uncontrolled",  "ideal",          "sparse",
                                         "sparse_local",  "sparse_local_noisy", "ideal_reduced",
                                         "sparse_reduced", "sparse_local_reduced", "sparse_local_noisy_reduced"};
    const fs::path root = fs::temp_directory_path() / "coopgrow_acceptance";
    fs::remove_all(root);
    std::size_t identical = 0;
    std::size_t files = 0;
    for (const auto& name : names) {
        bool same = true;
        for (const char* threads : {"1", "8"}) {
            std::ostringstream out, err;
            const int code = cli::run({"simulate", "--config", kConfigs + name + ".cfg", "--threads", threads,
                                       "--out-dir", (root / threads).string()},
                                      out, err);
            same = same && code == 0;
        }
        for (const char* suffix : {"_trajectory.csv", "_summary.csv"}) {
            const auto a = read_text_file((root / "1" / (name + suffix)).string());
            const auto b = read_text_file((root / "8" / (name + suffix)).string());
            same = same && a == b && !a.empty();
            ++files;
        }
        identical += same ? 1 : 0;
        if (!same) detail(name + ": outputs differ between --threads 1 and --threads 8");
    }
    detail(fmt::format("{} CSV files compared across {} shipped scenarios", files, names.size()));
    verdict(10, identical == names.size(),
            fmt::format("byte-identical CSV with --threads 1 and 8 ({}/{} scenarios)", identical, names.size()));
}

}  // namespace

int main()
{
    std::cout << fmt::format("acceptance run: {} worker threads, seeds 1..{}\n", kThreads, kSeeds);
    const auto t0 = std::chrono::steady_clock::now();
    criterion1();
    criterion2();
    criterion3();
    const std::vector<SeedRuns> runs = run_seeds();
    criterion4(runs);
    criterion5(runs);
    criterion6(runs);
    criterion7(runs);
    criterion8();
    criterion9();
    criterion10();
    std::cout << fmt::format("{} of 10 criteria failed ({:.1f} s)\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
