#include "fraclap/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <random>
#include <set>

#include "fraclap/energy.hpp"
#include "fraclap/io.hpp"
#include "fraclap/solver.hpp"

namespace fraclap::cli {

namespace {

using nlohmann::json;

struct RunConfig {
    std::string model = "sierpinski";
    int J = 4;
    int m0 = 0;
    std::string mode = "dyadic";
    double s = 0.9;
    double sigma = 0.5;
    double lambda = 1.0;
    std::string x;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string output;
    std::string preset = "ones";
    std::string input;
    std::string via = "quadrature";
    int samples = 10000;
    double tolSolver = 1e-8;
    double tolOrtho = 1e-12;
    double tolParseval = 1e-10;
};

std::shared_ptr<const SpaceModel> make_model(const RunConfig& cfg) {
    if (cfg.model == "sierpinski") return std::make_shared<SierpinskiModel>(cfg.m0);
    if (cfg.model == "halfline") return std::make_shared<HalfLineWeightModel>(cfg.m0);
    throw std::invalid_argument("unknown model '" + cfg.model + "' (expected sierpinski or halfline)");
}

std::string output_dir(const RunConfig& cfg) {
    if (!cfg.output.empty()) return cfg.output;
    if (const char* env = std::getenv("FRACLAP_OUTPUT_DIR")) return env;
    return ".";
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
    std::filesystem::path dir(output_dir(cfg));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    return (dir / file).string();
}

CellFunction random_cell_function(const DyadicTree& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CellFunction f(t);
    for (int i = 0; i < t.leafCount(); ++i) f[i] = u(rng);
    return f;
}

CellFunction random_ker_function(const HaarSystem& sys, const std::vector<int>& basis, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    HaarDecomposition d;
    d.topScalingCoeff = 0.0;
    d.waveletCoeffs.assign(static_cast<std::size_t>(sys.waveletCount()), 0.0);
    for (int id : basis) d.waveletCoeffs[static_cast<std::size_t>(id)] = u(rng);
    return haar_inverse(sys, d);
}

// canonical probe point: the leftmost leaf sits deepest inside the window, so
// its tail integrals carry the least truncation bias
Address leftmost_leaf(int J) {
    Address a;
    for (int i = 0; i < J; ++i) a = a.child(1);
    return a;
}

struct Assertion {
    std::string name;
    bool pass = true;
    json measured = json::object();
};

struct SuiteReport {
    std::string suite;
    json params = json::object();
    std::vector<Assertion> assertions;

    bool pass() const {
        for (const auto& a : assertions) if (!a.pass) return false;
        return true;
    }
    json toJson() const {
        json doc;
        doc["suite"] = suite;
        doc["params"] = params;
        doc["pass"] = pass();
        json arr = json::array();
        for (const auto& a : assertions)
            arr.push_back({{"name", a.name}, {"pass", a.pass}, {"measured", a.measured}});
        doc["assertions"] = arr;
        return doc;
    }
};

void print_report(const SuiteReport& rep) {
    for (const auto& a : rep.assertions)
        std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << rep.suite << "/" << a.name << " "
                  << a.measured.dump() << "\n";
    std::cout << (rep.pass() ? "[PASS] " : "[FAIL] ") << "suite " << rep.suite << "\n";
}

json base_params(const RunConfig& cfg) {
    return {{"model", cfg.model}, {"J", cfg.J}, {"m0", cfg.m0}, {"seed", cfg.seed}, {"workers", cfg.workers}};
}

// ---------------------------------------------------------------------------
// verify suites

SuiteReport suite_christ(const RunConfig& cfg) {
    DyadicTree t = build_tree(make_model(cfg), cfg.J);
    ChristReport christ = verify_christ_properties(t);

    SuiteReport rep;
    rep.suite = "christ";
    rep.params = base_params(cfg);

    rep.assertions.push_back({"unique_parent", christ.uniqueParent, json::object()});
    rep.assertions.push_back({"offspring_count_in_range", christ.offspringCountInRange, json::object()});
    rep.assertions.push_back({"nested_or_disjoint", christ.nestedOrDisjoint, json::object()});
    rep.assertions.push_back({"level_partition",
                              christ.maxPartitionDefect < 1e-12,
                              {{"max_defect", christ.maxPartitionDefect}}});

    double bandLo = 1e300, bandHi = 0.0;
    for (const auto& b : christ.bands) {
        bandLo = std::min(bandLo, b.diamRatioMin);
        bandHi = std::max(bandHi, b.diamRatioMax);
    }
    bool diamOk = bandLo >= 1.0 - 1e-12 && bandHi <= std::sqrt(2.0) + 1e-12;
    rep.assertions.push_back({"diameter_band", diamOk, {{"min", bandLo}, {"max", bandHi}}});

    json ecc = json::array();
    for (const auto& b : christ.bands)
        if (b.eccentricityMax > 0.0)
            ecc.push_back({{"level", b.level}, {"min", b.eccentricityMin}, {"max", b.eccentricityMax}});
    rep.assertions.push_back({"eccentricity_reported", true, {{"per_level", ecc}}});
    return rep;
}

SuiteReport suite_ultrametric(const RunConfig& cfg) {
    DyadicTree t = build_tree(make_model(cfg), cfg.J);
    SuiteReport rep;
    rep.suite = "ultrametric";
    rep.params = base_params(cfg);
    rep.params["samples"] = cfg.samples;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(0, t.leafCount() - 1);
    bool ultra = true;
    for (int k = 0; k < cfg.samples; ++k) {
        int a = pick(rng), b = pick(rng), c = pick(rng);
        double dab = dyadic_distance(t, a, b);
        double dbc = dyadic_distance(t, b, c);
        double dac = dyadic_distance(t, a, c);
        if (dac > std::max(dab, dbc)) ultra = false;
    }
    rep.assertions.push_back({"ultrametric_inequality_exact", ultra, {{"triples", cfg.samples}}});

    // radius grid: midpoints between consecutive distinct cube measures plus a
    // value above the top measure
    std::set<double> measures;
    for (int j = 0; j <= t.maxLevel(); ++j)
        for (int i = 0; i < t.cubeCount(j); ++i) measures.insert(t.cube(j, i).measure);
    std::vector<double> ms(measures.begin(), measures.end());
    std::vector<double> rGrid;
    for (std::size_t i = 0; i + 1 < ms.size(); ++i) rGrid.push_back(0.5 * (ms[i] + ms[i + 1]));
    rGrid.push_back(ms.back());
    rGrid.push_back(2.0 * ms.back());

    bool ballExact = true;
    bool ballUpper = true;
    double cLow = 1e300;
    for (int x = 0; x < t.leafCount(); ++x) {
        double leafMu = t.leaf(x).measure;
        for (double r : rGrid) {
            if (!(r > leafMu)) continue;  // below leaf scale the truncated tree has no cube
            // largest ancestor of x with measure < r
            int level = t.maxLevel();
            for (int j = t.maxLevel(); j >= 0; --j) {
                if (t.cube(j, t.ancestorIndex(x, j)).measure < r) level = j;
                else break;
            }
            int span = 1;
            for (int k = level; k < t.maxLevel(); ++k) span *= t.model().maxBranching();
            int lo = t.ancestorIndex(x, level) * span, hi = lo + span;
            double ballMu = t.cube(level, t.ancestorIndex(x, level)).measure;
            for (int y = 0; y < t.leafCount(); ++y) {
                bool inBall = dyadic_distance(t, x, y) < r;
                if (inBall != (y >= lo && y < hi)) ballExact = false;
            }
            if (!(ballMu < r)) ballUpper = false;
            cLow = std::min(cLow, ballMu / r);
        }
    }
    rep.assertions.push_back({"delta_ball_is_largest_cube", ballExact, json::object()});
    rep.assertions.push_back({"one_regularity", ballUpper && cLow > 0.0,
                              {{"lower_constant", cLow}, {"upper_strict", ballUpper}}});
    return rep;
}

SuiteReport suite_lemma1(const RunConfig& cfg) {
    auto model = make_model(cfg);
    SuiteReport rep;
    rep.suite = "lemma1";
    rep.params = base_params(cfg);
    rep.params["s"] = cfg.s;

    double window = std::ldexp(1.0, cfg.m0);
    std::vector<double> rList = {window / 2, window / 4, window / 8, window / 16};

    DyadicTree coarse = build_tree(model, cfg.J);
    DyadicTree fine = build_tree(model, cfg.J + 2);
    auto rowsCoarse = power_integral_ratios(coarse, leftmost_leaf(cfg.J), cfg.s, rList);
    auto rowsFine = power_integral_ratios(fine, leftmost_leaf(cfg.J + 2), cfg.s, rList);

    auto bandOf = [](const std::vector<PowerIntegralRow>& rows, bool local) {
        double lo = 1e300, hi = 0.0;
        for (const auto& row : rows) {
            double v = local ? row.ratioLocal : row.ratioTail;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return std::pair<double, double>(lo, hi);
    };
    auto [locLo, locHi] = bandOf(rowsFine, true);
    auto [tailLo, tailHi] = bandOf(rowsFine, false);
    rep.assertions.push_back({"local_ratio_band", locHi < 10.0 * locLo, {{"min", locLo}, {"max", locHi}}});
    rep.assertions.push_back({"tail_ratio_band", tailHi < 10.0 * tailLo, {{"min", tailLo}, {"max", tailHi}}});

    // Divergence probe at r = window/8: growth of the local ratio under two
    // levels of refinement stays below 50 percent for convergent integrals at
    // this radius, while the s = 0 integral keeps gaining a full shell per
    // level. Very small positive s converges too slowly to tell apart from
    // divergence at desk resolutions; the report carries all radii.
    json growth = json::array();
    for (std::size_t i = 0; i < rList.size(); ++i)
        growth.push_back({{"r", rList[i]},
                          {"coarse", rowsCoarse[i].ratioLocal},
                          {"fine", rowsFine[i].ratioLocal},
                          {"growth", rowsFine[i].ratioLocal / rowsCoarse[i].ratioLocal}});
    double probeGrowth = rowsFine[2].ratioLocal / rowsCoarse[2].ratioLocal;
    rep.assertions.push_back({"local_bounded_under_refinement", probeGrowth <= 1.5,
                              {{"probe_r", rList[2]},
                               {"probe_growth", probeGrowth},
                               {"rows", growth},
                               {"divergence_flagged", probeGrowth > 1.5}}});

    // window-boundary tail, dominated by truncation: reported, never asserted
    auto boundary = power_integral_ratios(coarse, leftmost_leaf(cfg.J), cfg.s,
                                          {model->topDiameter()});
    rep.assertions.push_back({"tail_at_window_truncation_reported", true,
                              {{"r", boundary[0].r}, {"ratio_tail", boundary[0].ratioTail}}});
    return rep;
}

SuiteReport suite_lemma2(const RunConfig& cfg) {
    auto model = make_model(cfg);
    DyadicTree t = build_tree(model, cfg.J);
    SuiteReport rep;
    rep.suite = "lemma2";
    rep.params = base_params(cfg);
    rep.params["samples"] = cfg.samples;

    double c0 = compare_measure_ball_delta(t, cfg.samples, cfg.seed);
    rep.assertions.push_back({"ball_measure_vs_delta_finite", std::isfinite(c0) && c0 > 0.0,
                              {{"constant", c0}}});

    std::size_t fineLeaves = 1;
    for (int j = 0; j < cfg.J + 1; ++j) fineLeaves *= static_cast<std::size_t>(model->maxBranching());
    if (fineLeaves <= DyadicTree::defaultLeafCap) {
        DyadicTree fine = build_tree(model, cfg.J + 1);
        double c1 = compare_measure_ball_delta(fine, cfg.samples, cfg.seed);
        double drift = c1 / c0;
        rep.assertions.push_back({"constant_stable_under_refinement", drift > 0.5 && drift < 2.0,
                                  {{"coarse", c0}, {"fine", c1}, {"drift", drift}}});
    }

    if (auto gamma = model->ahlforsExponent()) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<int> pick(0, t.leafCount() - 1);
        double worst = 0.0;
        for (int k = 0; k < cfg.samples; ++k) {
            int a = pick(rng), b = pick(rng);
            if (a == b) continue;
            double d = model->distance(t.leaf(a).rep, t.leaf(b).rep);
            worst = std::max(worst, std::pow(d, *gamma) / dyadic_distance(t, a, b));
        }
        rep.assertions.push_back({"distance_power_vs_delta_finite", std::isfinite(worst),
                                  {{"constant", worst}}});
    }
    return rep;
}

SuiteReport suite_haar(const RunConfig& cfg) {
    DyadicTree t = build_tree(make_model(cfg), cfg.J);
    HaarSystem sys = build_haar_system(t);
    SuiteReport rep;
    rep.suite = "haar";
    rep.params = base_params(cfg);

    int n = sys.waveletCount();
    auto basisFunction = [&](int k) {
        if (k == 0) {
            CellFunction f(t);
            for (int i = 0; i < t.leafCount(); ++i) f[i] = sys.topScalingValue();
            return f;
        }
        return sys.waveletAsCellFunction(k - 1);
    };

    double maxDev = 0.0;
    if (n + 1 <= 100) {
        for (int i = 0; i <= n; ++i) {
            CellFunction fi = basisFunction(i);
            for (int j = i; j <= n; ++j) {
                double g = fi.innerProduct(basisFunction(j));
                maxDev = std::max(maxDev, std::abs(g - (i == j ? 1.0 : 0.0)));
            }
        }
    } else {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<int> pick(0, n);
        for (int k = 0; k < 2000; ++k) {
            int i = pick(rng), j = pick(rng);
            double g = basisFunction(i).innerProduct(basisFunction(j));
            maxDev = std::max(maxDev, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    rep.assertions.push_back({"orthonormality", maxDev < cfg.tolOrtho, {{"max_deviation", maxDev}}});

    std::mt19937_64 rng(cfg.seed);
    double maxParseval = 0.0, maxRoundTrip = 0.0;
    for (int k = 0; k < 100; ++k) {
        CellFunction f = random_cell_function(t, rng);
        HaarDecomposition d = haar_forward(sys, f);
        double sq = d.topScalingCoeff * d.topScalingCoeff;
        for (double c : d.waveletCoeffs) sq += c * c;
        double l2 = f.l2NormSq();
        maxParseval = std::max(maxParseval, std::abs(sq - l2) / l2);
        CellFunction back = haar_inverse(sys, d);
        for (int i = 0; i < t.leafCount(); ++i)
            maxRoundTrip = std::max(maxRoundTrip, std::abs(back[i] - f[i]));
    }
    rep.assertions.push_back({"parseval", maxParseval < cfg.tolParseval, {{"max_relative_error", maxParseval}}});
    rep.assertions.push_back({"round_trip", maxRoundTrip < 1e-10, {{"max_sup_error", maxRoundTrip}}});

    // nested projections and the dual computation of P_j
    double maxNest = 0.0, maxDual = 0.0;
    CellFunction f = random_cell_function(t, rng);
    HaarDecomposition full = haar_forward(sys, f);
    for (int j = 0; j <= t.maxLevel(); ++j) {
        CellFunction pj = project_Pj(sys, f, j);
        HaarDecomposition trunc = full;
        for (int id = 0; id < sys.waveletCount(); ++id)
            if (sys.wavelet(id).level >= j) trunc.waveletCoeffs[static_cast<std::size_t>(id)] = 0.0;
        CellFunction viaCoeffs = haar_inverse(sys, trunc);
        for (int i = 0; i < t.leafCount(); ++i)
            maxDual = std::max(maxDual, std::abs(pj[i] - viaCoeffs[i]));
        for (int k = 0; k <= t.maxLevel(); ++k) {
            CellFunction pkj = project_Pj(sys, pj, k);
            CellFunction pmin = project_Pj(sys, f, std::min(j, k));
            for (int i = 0; i < t.leafCount(); ++i)
                maxNest = std::max(maxNest, std::abs(pkj[i] - pmin[i]));
        }
    }
    rep.assertions.push_back({"projection_dual_path", maxDual < 1e-10, {{"max_error", maxDual}}});
    rep.assertions.push_back({"nested_projections", maxNest < 1e-10, {{"max_error", maxNest}}});

    // coefficient-level monotonicity of the coarse-scale projections
    bool monotone = true;
    double muTop = t.cube(0, 0).measure;
    for (double lambda : {muTop / 9.0, muTop / 3.0, muTop}) {
        HaarDecomposition d;
        d.topScalingCoeff = 0.0;
        d.waveletCoeffs.assign(static_cast<std::size_t>(sys.waveletCount()), 0.0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int id : ker_pilambda_basis(sys, lambda)) d.waveletCoeffs[static_cast<std::size_t>(id)] = u(rng);
        for (double lambdaPrime : {lambda, 2.0 * lambda, 10.0 * lambda}) {
            for (int id = 0; id < sys.waveletCount(); ++id)
                if (sys.baseCubeMeasure(id) > lambdaPrime &&
                    d.waveletCoeffs[static_cast<std::size_t>(id)] != 0.0)
                    monotone = false;
        }
    }
    rep.assertions.push_back({"pilambda_monotone_exact", monotone, json::object()});
    return rep;
}

SuiteReport suite_energy_equivalence(const RunConfig& cfg) {
    auto model = make_model(cfg);
    DyadicTree t = build_tree(model, cfg.J);
    HaarSystem sys = build_haar_system(t);
    SuiteReport rep;
    rep.suite = "energy-equivalence";
    rep.params = base_params(cfg);
    rep.params["sigma"] = cfg.sigma;

    std::mt19937_64 rng(cfg.seed);
    double maxRel = 0.0;
    double minMetricRatio = 1e300;
    bool metric = model->ahlforsExponent().has_value() && cfg.sigma * *model->ahlforsExponent() < 1.0;
    for (int k = 0; k < 200; ++k) {
        CellFunction f = random_cell_function(t, rng);
        double quad = energy_quadrature(t, f, KernelParams::dyadic(cfg.sigma), cfg.workers);
        double haar = energy_haar(sys, f, cfg.sigma);
        maxRel = std::max(maxRel, std::abs(quad - haar) / haar);
        if (metric) {
            double met = energy_quadrature(t, f, KernelParams::metric(cfg.sigma * *model->ahlforsExponent()),
                                           cfg.workers);
            minMetricRatio = std::min(minMetricRatio, met / haar);
        }
    }
    rep.assertions.push_back({"dyadic_quadrature_equals_haar_sum", maxRel < 1e-8,
                              {{"max_relative_error", maxRel}, {"functions", 200}}});
    if (metric)
        rep.assertions.push_back({"metric_vs_dyadic_constant_reported", minMetricRatio > 0.0,
                                  {{"min_ratio", minMetricRatio}}});
    return rep;
}

SuiteReport suite_coercivity(const RunConfig& cfg) {
    DyadicTree t = build_tree(make_model(cfg), cfg.J);
    HaarSystem sys = build_haar_system(t);
    SuiteReport rep;
    rep.suite = "coercivity";
    rep.params = base_params(cfg);
    rep.params["sigma"] = cfg.sigma;
    rep.params["lambda"] = cfg.lambda;

    std::vector<int> basis = ker_pilambda_basis(sys, cfg.lambda);
    if (basis.empty())
        throw std::invalid_argument("coercivity basis is empty: no wavelet cube has measure <= lambda = " +
                                    std::to_string(cfg.lambda));

    std::mt19937_64 rng(cfg.seed);
    bool all = true;
    double minRatio = 1e300, minMetricRatio = 1e300;
    for (int k = 0; k < 100; ++k) {
        CellFunction f = random_ker_function(sys, basis, rng);
        CoercivityReport r = coercivity_check(sys, f, cfg.lambda, cfg.sigma);
        all = all && r.pass;
        if (r.bound > 0.0) minRatio = std::min(minRatio, r.energy / r.bound);
        if (r.metricRatio > 0.0) minMetricRatio = std::min(minMetricRatio, r.metricRatio);
    }
    json measured = {{"min_energy_over_bound", minRatio}, {"coercivity_constant", 1.0}};
    if (minMetricRatio < 1e300) measured["min_metric_energy_over_l2"] = minMetricRatio;
    rep.assertions.push_back({"delta_energy_dominates_l2", all && minRatio >= 1.0, measured});
    return rep;
}

SuiteReport suite_duality(const RunConfig& cfg) {
    auto model = make_model(cfg);
    DyadicTree t = build_tree(model, cfg.J);
    SuiteReport rep;
    rep.suite = "duality";
    rep.params = base_params(cfg);
    rep.params["sigma"] = cfg.sigma;

    std::vector<KernelParams> kernels = {KernelParams::dyadic(cfg.sigma)};
    if (model->ahlforsExponent()) {
        rep.params["s"] = cfg.s;
        kernels.push_back(KernelParams::metric(cfg.s));
    }
    std::mt19937_64 rng(cfg.seed);
    double maxRel = 0.0;
    for (const auto& p : kernels) {
        for (int k = 0; k < 100; ++k) {
            CellFunction u = random_cell_function(t, rng);
            CellFunction v = random_cell_function(t, rng);
            double b = bilinear_form(t, u, v, p, cfg.workers);
            CellFunction du = apply_D2s(t, u, p, cfg.workers);
            double dual = 2.0 * du.innerProduct(v);
            maxRel = std::max(maxRel, std::abs(b - dual) / std::max({std::abs(b), std::abs(dual), 1e-300}));
        }
    }
    rep.assertions.push_back({"bilinear_equals_twice_operator_pairing", maxRel < 1e-12,
                              {{"max_relative_error", maxRel}}});
    return rep;
}

// ---------------------------------------------------------------------------
// commands

int cmd_tree(const RunConfig& cfg) {
    DyadicTree t = build_tree(make_model(cfg), cfg.J);
    write_text_file(out_path(cfg, "tree.json"), tree_to_json_string(t));
    std::cout << "wrote tree.json with " << t.totalCubeCount() << " cubes (" << t.leafCount()
              << " leaves)\n";
    return 0;
}

CellFunction load_input_function(const RunConfig& cfg, const DyadicTree& t) {
    if (!cfg.input.empty()) return read_cell_function_csv(t, cfg.input);
    if (cfg.preset == "ones") return CellFunction(t, 1.0);
    if (cfg.preset == "random") {
        std::mt19937_64 rng(cfg.seed);
        return random_cell_function(t, rng);
    }
    throw std::invalid_argument("unknown preset '" + cfg.preset + "' (expected ones or random)");
}

int cmd_transform(const RunConfig& cfg) {
    DyadicTree t = build_tree(make_model(cfg), cfg.J);
    HaarSystem sys = build_haar_system(t);
    CellFunction f = load_input_function(cfg, t);
    HaarDecomposition d = haar_forward(sys, f);
    write_text_file(out_path(cfg, "transform_coeffs.csv"), decomposition_to_csv(sys, d));
    json meta = base_params(cfg);
    meta["preset"] = cfg.input.empty() ? cfg.preset : "file:" + cfg.input;
    meta["wavelets"] = sys.waveletCount();
    write_text_file(out_path(cfg, "transform_meta.json"), meta.dump(2) + "\n");
    std::cout << "wrote transform_coeffs.csv (" << sys.waveletCount() + 1 << " rows)\n";
    return 0;
}

KernelParams kernel_from_config(const RunConfig& cfg) {
    if (cfg.mode == "metric") return KernelParams::metric(cfg.s);
    if (cfg.mode == "dyadic") return KernelParams::dyadic(cfg.sigma);
    throw std::invalid_argument("unknown mode '" + cfg.mode + "' (expected metric or dyadic)");
}

int cmd_energy(const RunConfig& cfg) {
    auto model = make_model(cfg);
    DyadicTree t = build_tree(model, cfg.J);
    KernelParams p = kernel_from_config(cfg);
    p.validate(*model);
    if (cfg.via == "haar" && p.mode != KernelMode::dyadic)
        throw std::invalid_argument("--via haar applies to the dyadic mode only");

    CellFunction f = load_input_function(cfg, t);
    double energy = 0.0;
    if (cfg.via == "haar") {
        HaarSystem sys = build_haar_system(t);
        energy = energy_haar(sys, f, cfg.sigma);
    } else if (cfg.via == "quadrature") {
        energy = energy_quadrature(t, f, p, cfg.workers);
    } else {
        throw std::invalid_argument("unknown route '" + cfg.via + "' (expected quadrature or haar)");
    }
    EnergyReport er = make_energy_report(energy, f.l2NormSq());

    json doc;
    doc["mode"] = cfg.mode;
    doc["params"] = json::object();
    if (p.mode == KernelMode::metric) doc["params"]["s"] = cfg.s;
    else doc["params"]["sigma"] = cfg.sigma;
    doc["via"] = cfg.via;
    doc["energy"] = er.energyValue;
    doc["l2"] = er.l2NormSq;
    doc["sobolevNorm"] = er.sobolevNorm;
    doc["J"] = cfg.J;
    doc["model"] = cfg.model;
    doc["workers"] = cfg.workers;
    doc["seed"] = cfg.seed;
    write_text_file(out_path(cfg, "energy_report.json"), doc.dump(2) + "\n");
    std::cout << "energy = " << format_double(er.energyValue) << "\n";
    return 0;
}

int cmd_green(const RunConfig& cfg) {
    auto model = make_model(cfg);
    KernelParams p = kernel_from_config(cfg);
    p.validate(*model);
    if (p.mode == KernelMode::metric) {
        double gamma = *model->ahlforsExponent();
        if (!(p.s > 0.5 * gamma))
            throw std::invalid_argument(
                "finite-energy solutions are continuous (and point sources admissible) only for s > gamma/2 = " +
                std::to_string(0.5 * gamma) + "; got s = " + std::to_string(p.s));
    }

    DyadicTree t = build_tree(model, cfg.J);
    Address x = model->parseAddress(cfg.x);
    if (x.level() != cfg.J) throw std::invalid_argument("--x must name a level-J leaf address");

    HaarSystem sys = build_haar_system(t);
    GalerkinProblem problem = assemble(sys, p, cfg.lambda, cfg.workers);
    SolveOptions opts;
    opts.tolerance = cfg.tolSolver;
    WeakSolution sol = green_function(problem, x, opts);

    write_text_file(out_path(cfg, "green_solution.csv"), solution_to_csv(sol.asCellFunction));
    write_text_file(out_path(cfg, "green_plot.csv"), plot_data_csv(sol.asCellFunction));
    json meta;
    meta["mode"] = cfg.mode;
    if (p.mode == KernelMode::metric) meta["s"] = cfg.s;
    else meta["sigma"] = cfg.sigma;
    meta["lambda"] = cfg.lambda;
    meta["J"] = cfg.J;
    meta["model"] = cfg.model;
    meta["x"] = cfg.x;
    meta["residualNorm"] = sol.residualNorm;
    meta["basisSize"] = problem.dim;
    meta["workers"] = cfg.workers;
    meta["factor_convention"] = "B=2<Du,v>";
    write_text_file(out_path(cfg, "green_meta.json"), meta.dump(2) + "\n");
    std::cout << "wrote green_solution.csv, residualNorm = " << format_double(sol.residualNorm) << "\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite) {
    SuiteReport rep;
    if (suite == "christ") rep = suite_christ(cfg);
    else if (suite == "ultrametric") rep = suite_ultrametric(cfg);
    else if (suite == "lemma1") rep = suite_lemma1(cfg);
    else if (suite == "lemma2") rep = suite_lemma2(cfg);
    else if (suite == "haar") rep = suite_haar(cfg);
    else if (suite == "energy-equivalence") rep = suite_energy_equivalence(cfg);
    else if (suite == "coercivity") rep = suite_coercivity(cfg);
    else if (suite == "duality") rep = suite_duality(cfg);
    else throw std::invalid_argument("unknown suite '" + suite + "'");

    print_report(rep);
    write_text_file(out_path(cfg, "verify_" + suite + ".json"), rep.toJson().dump(2) + "\n");
    return rep.pass() ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Haar analysis and nonlocal Green functions on the Sierpinski gasket and the weighted half line"};
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    RunConfig cfg;
    std::string suite;

    auto addCommon = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "sierpinski or halfline")->capture_default_str();
        sub->add_option("--J", cfg.J, "resolution level")->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--m0", cfg.m0, "window exponent")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
        sub->add_option("--workers", cfg.workers, "parallel workers for pair sums")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--output", cfg.output, "output directory (default $FRACLAP_OUTPUT_DIR or .)");
    };

    CLI::App* treeCmd = app.add_subcommand("tree", "export the cube family as JSON");
    addCommon(treeCmd);

    CLI::App* transformCmd = app.add_subcommand("transform", "Haar coefficients of a leaf function as CSV");
    addCommon(transformCmd);
    transformCmd->add_option("--preset", cfg.preset, "ones or random")->capture_default_str();
    transformCmd->add_option("--input", cfg.input, "leaf_address,value CSV to transform");

    CLI::App* energyCmd = app.add_subcommand("energy", "energy report for a leaf function");
    addCommon(energyCmd);
    energyCmd->add_option("--mode", cfg.mode, "metric or dyadic")->capture_default_str();
    auto* energyS = energyCmd->add_option("--s", cfg.s, "metric smoothness in (0,1)");
    auto* energySigma = energyCmd->add_option("--sigma", cfg.sigma, "dyadic smoothness in (0,1)");
    energyCmd->add_option("--via", cfg.via, "quadrature or haar (dyadic mode)")->capture_default_str();
    energyCmd->add_option("--preset", cfg.preset, "ones or random")->capture_default_str();
    energyCmd->add_option("--input", cfg.input, "leaf_address,value CSV");

    CLI::App* greenCmd = app.add_subcommand("green", "Green function through the coercivity subspace");
    addCommon(greenCmd);
    greenCmd->add_option("--mode", cfg.mode, "metric or dyadic")->capture_default_str();
    auto* greenS = greenCmd->add_option("--s", cfg.s, "metric smoothness in (gamma/2,1)");
    auto* greenSigma = greenCmd->add_option("--sigma", cfg.sigma, "dyadic smoothness in (0,1)");
    greenCmd->add_option("--lambda", cfg.lambda, "coercivity scale: wavelet cubes of measure <= lambda")
        ->required();
    greenCmd->add_option("--x", cfg.x, "source leaf address, e.g. 4:1111")->required();
    greenCmd->add_option("--tol-solver", cfg.tolSolver, "solver residual tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI::App* verifyCmd = app.add_subcommand("verify", "run a verification suite");
    verifyCmd
        ->add_option("suite", suite,
                     "christ | ultrametric | lemma1 | lemma2 | haar | energy-equivalence | coercivity | duality")
        ->required();
    addCommon(verifyCmd);
    auto* verifyS = verifyCmd->add_option("--s", cfg.s, "metric smoothness");
    auto* verifySigma = verifyCmd->add_option("--sigma", cfg.sigma, "dyadic smoothness");
    auto* verifyLambda = verifyCmd->add_option("--lambda", cfg.lambda, "coercivity scale");
    verifyCmd->add_option("--samples", cfg.samples, "sample count for randomized checks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verifyCmd->add_option("--tol-ortho", cfg.tolOrtho, "orthonormality tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verifyCmd->add_option("--tol-parseval", cfg.tolParseval, "Parseval tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (treeCmd->parsed()) return cmd_tree(cfg);
        if (transformCmd->parsed()) return cmd_transform(cfg);
        if (energyCmd->parsed()) {
            if (cfg.mode == "metric" && energySigma->count() > 0)
                throw std::invalid_argument("--sigma is not a metric-mode parameter");
            if (cfg.mode == "dyadic" && energyS->count() > 0)
                throw std::invalid_argument("--s is not a dyadic-mode parameter");
            return cmd_energy(cfg);
        }
        if (greenCmd->parsed()) {
            if (cfg.mode == "metric" && greenSigma->count() > 0)
                throw std::invalid_argument("--sigma is not a metric-mode parameter");
            if (cfg.mode == "dyadic" && greenS->count() > 0)
                throw std::invalid_argument("--s is not a dyadic-mode parameter");
            if (cfg.mode == "metric" && greenS->count() == 0)
                throw std::invalid_argument("metric mode requires --s");
            if (cfg.mode == "dyadic" && greenSigma->count() == 0)
                throw std::invalid_argument("dyadic mode requires --sigma");
            return cmd_green(cfg);
        }
        if (verifyCmd->parsed()) {
            if (verifyCmd->get_option("--J")->count() == 0) {
                // suites probing metric balls need room below the radius grid
                if (suite == "lemma1") cfg.J = 5;
                else if (suite == "lemma2" || suite == "ultrametric") cfg.J = 6;
            }
            // a suite demands exactly its own parameters; extras are named and rejected
            struct Demanded { bool s, sigma, lambda; };
            Demanded allow{false, false, false};
            if (suite == "lemma1") allow = {true, false, false};
            else if (suite == "coercivity") allow = {false, true, true};
            else if (suite == "energy-equivalence") allow = {false, true, false};
            else if (suite == "duality") allow = {true, true, false};
            if (!allow.s && verifyS->count() > 0)
                throw std::invalid_argument("--s is not a parameter of the " + suite + " suite");
            if (!allow.sigma && verifySigma->count() > 0)
                throw std::invalid_argument("--sigma is not a parameter of the " + suite + " suite");
            if (!allow.lambda && verifyLambda->count() > 0)
                throw std::invalid_argument("--lambda is not a parameter of the " + suite + " suite");
            if (suite == "lemma1" && verifyS->count() == 0)
                throw std::invalid_argument("the lemma1 suite requires --s");
            if (suite == "coercivity" && (verifySigma->count() == 0 || verifyLambda->count() == 0))
                throw std::invalid_argument("the coercivity suite requires --sigma and --lambda");
            return cmd_verify(cfg, suite);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace fraclap::cli
