#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <opasym/compare.hpp>
#include <opasym/config.hpp>
#include <opasym/csv.hpp>
#include <opasym/equilibrium.hpp>
#include <opasym/exact_ortho.hpp>
#include <opasym/fillings.hpp>
#include <opasym/genus0.hpp>
#include <opasym/multicut.hpp>
#include <opasym/riemann.hpp>
#include <opasym/sampler.hpp>
#include <opasym/svg.hpp>

using namespace opasym;
namespace fs = std::filesystem;

namespace {

struct Run {
    Config cfg;
    fs::path out;
    bool plot = false;
    std::string stamp;  // provenance comment written into every CSV

    std::string path(const std::string& name) const { return (out / name).string(); }
};

int cuts_requested(const Config& c) { return c.run.cuts_hint.value_or(1); }

SolveOptions solve_options(const Config& c) {
    SolveOptions o;
    if (c.run.cut_guess) {
        std::vector<Cut> g;
        for (const auto& [a, b] : *c.run.cut_guess) g.push_back({a, b});
        o.guess = std::move(g);
    }
    return o;
}

/// Measure at the fillings that extremise F (or the configured fillings when
/// `honour_fillings` is set), together with the optimum data when s >= 2.
struct Solved {
    EquilibriumMeasure meas;
    std::optional<FillingOptimum> optimum;
};

Solved solve(const Config& c, bool honour_fillings) {
    const int s = cuts_requested(c);
    const auto so = solve_options(c);
    if (s == 1) return {solve_one_cut(c.potential, c.run.T, so), std::nullopt};
    if (honour_fillings && c.run.fillings) {
        if (static_cast<int>(c.run.fillings->size()) != s) throw config_error("fillings", "must have one entry per cut");
        return {solve_multi_cut(c.potential, c.run.T, s, *c.run.fillings, so), std::nullopt};
    }
    FillingOptions fo;
    if (c.run.fillings) {
        if (static_cast<int>(c.run.fillings->size()) != s) throw config_error("fillings", "must have one entry per cut");
        fo.start = *c.run.fillings;
    }
    auto opt = optimize_fillings(c.potential, c.run.T, s, fo, so);
    auto meas = opt.measure;
    return {std::move(meas), std::move(opt)};
}

double edge_delta(const Config& c, const EquilibriumMeasure& m) {
    return c.run.edge_exclusion_delta.value_or(default_edge_delta(m, c.run.N));
}

/// Equilibrium mass to the left of x.
double mass_left_of(const EquilibriumMeasure& m, double x) {
    double acc = 0.0;
    for (int k = 0; k < m.s(); ++k) {
        const Cut& c = m.cuts[static_cast<std::size_t>(k)];
        if (x >= c.b) acc += cut_mass(m, k);
        else if (x > c.a) acc += cut_mass(m, k) - mass_right_of(m, x);
    }
    return acc;
}

/// Predictions on either the genus-0 or the multi-cut path.
class Predictor {
public:
    Predictor(const Config& c, const Solved& s) : delta_(edge_delta(c, s.meas)), pot_(c.potential) {
        if (s.meas.s() == 1) {
            meas_ = s.meas;
            map_ = JoukowskiMap::from_measure(s.meas);
        } else {
            multi_ = MultiCutModel::build(c.potential, s.meas, s.optimum->zeta);
        }
    }

    AsymptoticPrediction at(int n, int N, double xi) const {
        if (multi_) return asym_multicut(*multi_, n, N, xi, delta_);
        return asym_genus0(*meas_, pot_, *map_, n, N, xi, delta_);
    }
    const EquilibriumMeasure& measure() const { return multi_ ? multi_->meas : *meas_; }
    double delta() const { return delta_; }

private:
    double delta_;
    Potential pot_;
    std::optional<EquilibriumMeasure> meas_;
    std::optional<JoukowskiMap> map_;
    std::optional<MultiCutModel> multi_;
};

std::string cut_table_text(const EquilibriumMeasure& m) {
    std::ostringstream os;
    os.precision(12);
    for (int k = 0; k < m.s(); ++k) {
        const Cut& c = m.cuts[static_cast<std::size_t>(k)];
        os << (k ? ", " : "") << "[" << c.a << ", " << c.b << "]";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_equilibrium(const Run& r) {
    const auto& c = r.cfg;
    const auto s = solve(c, true);
    const auto& m = s.meas;
    {
        CsvWriter w(r.path("cuts.csv"), r.stamp, {"i", "a_i", "b_i", "eps_i"});
        for (int k = 0; k < m.s(); ++k)
            w.row(k, m.cuts[static_cast<std::size_t>(k)].a, m.cuts[static_cast<std::size_t>(k)].b, m.fillings[static_cast<std::size_t>(k)]);
    }
    {
        CsvWriter w(r.path("moment.csv"), r.stamp, {"k", "M_k"});
        for (std::size_t k = 0; k < m.M.size(); ++k) w.row(static_cast<int>(k), m.M[k]);
    }
    const auto grid = c.run.grid.points();
    std::vector<std::pair<double, double>> pts;
    {
        CsvWriter w(r.path("density.csv"), r.stamp, {"x", "rho"});
        for (double x : grid) {
            const double rho = density(m, x);
            w.row(x, rho);
            pts.emplace_back(x, rho);
        }
    }
    double worst = 0.0;
    for (const auto& cut : m.cuts)
        for (int i = 1; i <= 20; ++i) worst = std::max(worst, saddle_residual(m, c.potential, cut.a + cut.width() * i / 21.0));
    const auto grad = filling_gradient(m);
    std::cout << "cuts: " << cut_table_text(m) << "\n";
    std::cout << "M:";
    for (double v : m.M) std::cout << ' ' << format_double(v);
    std::cout << "\nfillings:";
    for (double v : m.fillings) std::cout << ' ' << format_double(v);
    std::cout << "\ntotal mass: " << format_double(total_mass(m)) << "\nmax saddle residual: " << format_double(worst) << "\n";
    if (!grad.empty()) {
        std::cout << "dF/deps:";
        for (double g : grad) std::cout << ' ' << format_double(g);
        std::cout << "\n";
    }
    if (r.plot) write_svg_plot(r.path("density.svg"), "equilibrium density", {{"rho", "#1f77b4", pts, false}});
    return 0;
}

int cmd_exact(const Run& r) {
    const auto& c = r.cfg;
    const int nmax = *std::max_element(c.run.n_values.begin(), c.run.n_values.end()) + 1;
    const auto t = exact_table<mp_real>(c.potential, c.run.N, nmax, c.run.precision_digits);
    {
        CsvWriter w(r.path("recurrence.csv"), r.stamp, {"n", "a_n", "b_n", "log_h_n"});
        for (int n = 0; n <= nmax; ++n)
            w.row(n, to_double(t.a[static_cast<std::size_t>(n)]), to_double(t.b[static_cast<std::size_t>(n)]), t.log_h(n));
    }
    CsvWriter w(r.path("wave.csv"), r.stamp, {"n", "xi", "psi", "log_abs_p", "sign_p"});
    for (int n : c.run.n_values)
        for (double xi : c.run.grid.points()) {
            const auto ws = eval_wave(t, c.potential, n, xi);
            w.row(n, xi, ws.psi, ws.log_abs_p, ws.sign_p);
        }
    std::cout << "recurrence up to n = " << nmax << " at " << c.run.precision_digits << " digits\n";
    return 0;
}

int cmd_asym(const Run& r) {
    const auto& c = r.cfg;
    const Predictor pr(c, solve(c, false));
    CsvWriter w(r.path("asym.csv"), r.stamp, {"n", "N", "xi", "regime", "psi_pred", "envelope", "log_abs_p_pred", "phase", "Re_Lambda", "Im_Lambda"});
    for (int n : c.run.n_values)
        for (double xi : c.run.grid.points()) {
            const auto a = pr.at(n, c.run.N, xi);
            w.row(n, c.run.N, xi, regime_name(a.regime.kind), a.psi_pred, a.envelope, a.log_abs_p_pred,
                  a.phase.value_or(std::nan("")), a.ingredients.Lambda.real(), a.ingredients.Lambda.imag());
        }
    std::cout << "cuts: " << cut_table_text(pr.measure()) << "\nedge band: " << format_double(pr.delta()) << "\n";
    return 0;
}

bool near_exact_zero(double exact, const AsymptoticPrediction& a) { return std::abs(exact) < 1e-3 * a.envelope; }

int cmd_compare(const Run& r) {
    const auto& c = r.cfg;
    const int N = c.run.N;
    const Predictor pr(c, solve(c, false));
    const auto& m = pr.measure();
    const double delta = pr.delta();
    const auto grid = c.run.grid.points();
    bool any = false;
    for (double xi : grid)
        if (classify_regime(m, xi, delta).kind != Regime::excluded_edge) any = true;
    if (!any) throw config_error("grid", "every grid point lies inside an edge-exclusion band");

    const int nmax = *std::max_element(c.run.n_values.begin(), c.run.n_values.end()) + 1;
    const auto t = exact_table<mp_real>(c.potential, N, nmax, c.run.precision_digits);

    CsvWriter w(r.path("comparison.csv"), r.stamp,
                {"n", "N", "xi", "regime", "psi_exact", "psi_pred", "abs_err", "rel_err_or_envelope_err", "phase"});
    CsvWriter ws(r.path("summary.csv"), r.stamp, {"n", "max_envelope_err", "max_zero_count_delta", "lambda_ratio_err"});
    CsvWriter wr(r.path("ratio.csv"), r.stamp, {"n", "xi", "ratio_exact", "ratio_pred", "Re_Lambda"});

    std::cout << "cuts: " << cut_table_text(m) << "\nedge band: " << format_double(delta) << "\n";
    for (int n : c.run.n_values) {
        double worst_env = 0.0;
        int skipped = 0;
        std::vector<std::pair<double, double>> pe, pp;
        for (double xi : grid) {
            const double ex = eval_wave(t, c.potential, n, xi).psi;
            const auto a = pr.at(n, N, xi);
            const double abs_err = std::abs(a.psi_pred - ex);
            double err = std::nan("");
            if (a.regime.kind == Regime::on_cut) {
                err = abs_err / a.envelope;
                worst_env = std::max(worst_env, err);
            } else if (a.regime.kind == Regime::outside) {
                // a relative error means nothing at an exact zero of psi off the cuts
                if (near_exact_zero(ex, a)) {
                    err = abs_err / a.envelope;
                    ++skipped;
                } else {
                    err = abs_err / std::abs(ex);
                    worst_env = std::max(worst_env, err);
                }
            }
            w.row(n, N, xi, regime_name(a.regime.kind), ex, a.psi_pred, abs_err, err, a.phase.value_or(std::nan("")));
            pe.emplace_back(xi, ex);
            pp.emplace_back(xi, a.psi_pred);
        }
        int zero_delta = 0;
        const auto exact_z = exact_zeros(t, n);
        for (const auto& cut : m.cuts) {
            const double lo = cut.a + delta, hi = cut.b - delta;
            if (!(hi > lo)) continue;
            const auto pz = find_zeros([&](double x) { return pr.at(n, N, x).psi_pred; }, lo, hi, 400);
            zero_delta = std::max(zero_delta, std::abs(static_cast<int>(pz.size()) - static_cast<int>(zeros_in(exact_z, lo, hi).size())));
        }
        double ratio_err = std::nan("");
        if (std::find(c.run.n_values.begin(), c.run.n_values.end(), n + 1) != c.run.n_values.end()) {
            ratio_err = 0.0;
            for (double xi : grid) {
                const auto a0 = pr.at(n, N, xi), a1 = pr.at(n + 1, N, xi);
                if (a0.regime.kind != Regime::outside) continue;
                const double e0 = eval_wave(t, c.potential, n, xi).psi, e1 = eval_wave(t, c.potential, n + 1, xi).psi;
                if (near_exact_zero(e0, a0) || near_exact_zero(e1, a1)) continue;
                const double re = e1 / e0;
                const double rp = a1.psi_pred / a0.psi_pred;
                wr.row(n, xi, re, rp, a0.ingredients.Lambda.real());
                ratio_err = std::max(ratio_err, std::abs(rp / re - 1.0));
            }
        }
        ws.row(n, worst_env, zero_delta, ratio_err);
        std::cout << "n = " << n << ": max envelope error " << format_double(worst_env) << ", zero-count delta " << zero_delta
                  << ", Lambda-ratio error " << format_double(ratio_err);
        if (skipped > 0) std::cout << " (" << skipped << " points at exact zeros off the cuts not scored)";
        std::cout << "\n";
        if (r.plot)
            write_svg_plot(r.path("compare_n" + std::to_string(n) + ".svg"), "psi_" + std::to_string(n) + ": exact vs predicted",
                           {{"exact", "#1f77b4", pe, false}, {"predicted", "#d62728", pp, false}});
    }
    return 0;
}

int cmd_sample(const Run& r) {
    const auto& c = r.cfg;
    if (!c.run.seed_given) std::cerr << "seed not given; using 0\n";
    const auto s = solve(c, true);
    const auto& m = s.meas;
    const double w = m.right() - m.left();
    SamplerOptions o;
    o.n = c.run.sampler.n;
    o.T = c.run.T;
    o.sweeps = c.run.sampler.sweeps;
    o.burn_in = c.run.sampler.burn_in;
    o.thin = c.run.sampler.thin;
    o.seed = c.run.seed;
    o.bins = c.run.sampler.bins;
    o.hist_lo = m.left() - 0.2 * w;
    o.hist_hi = m.right() + 0.2 * w;
    o.window = std::make_pair(o.hist_lo, o.hist_hi);
    o.global_move_rate = c.run.sampler.global_move_rate;
    for (int k = 0; k + 1 < m.s(); ++k) o.region_edges.push_back(0.5 * (m.cuts[static_cast<std::size_t>(k)].b + m.cuts[static_cast<std::size_t>(k + 1)].a));
    const auto res = sample_gas(c.potential, o);

    const double draws = static_cast<double>(o.n) * static_cast<double>(res.snapshots);
    std::vector<std::pair<double, double>> ph, pe;
    {
        CsvWriter hw(r.path("histogram.csv"), r.stamp, {"bin_lo", "bin_hi", "count", "expected", "sigma"});
        const auto& h = res.histogram;
        for (int k = 0; k < h.bins(); ++k) {
            const double lo = h.bin_lo(k), hi = h.bin_hi(k), width = hi - lo;
            const double expected = (mass_left_of(m, hi) - mass_left_of(m, lo)) * draws;
            const auto& f = h.fraction[static_cast<std::size_t>(k)];
            hw.row(lo, hi, h.counts[static_cast<std::size_t>(k)], expected, f.sigma * draws);
            ph.emplace_back(lo, f.mean / width);
            pe.emplace_back(0.5 * (lo + hi), expected / draws / width);
        }
        ph.emplace_back(h.hi, ph.back().second);
    }
    {
        CsvWriter mw(r.path("chain.csv"), r.stamp,
                     {"seed", "n", "T", "sweeps", "burn_in", "thin", "snapshots", "acceptance_rate", "global_acceptance_rate", "step_scale",
                      "max_log_weight_drift"});
        const auto& st = res.state;
        const double gacc = st.global_proposed ? static_cast<double>(st.global_accepted) / static_cast<double>(st.global_proposed) : 0.0;
        mw.row(static_cast<long>(o.seed), o.n, o.T, o.sweeps, o.burn_in, o.thin, res.snapshots, st.acceptance_rate(), gacc, st.step_scale,
               st.max_drift);
    }
    {
        CsvWriter ow(r.path("occupation.csv"), r.stamp, {"cut", "fraction", "sigma", "eps_over_T"});
        for (std::size_t k = 0; k < res.occupation.size(); ++k)
            ow.row(static_cast<int>(k), res.occupation[k].mean, res.occupation[k].sigma, m.fillings[k] / m.T);
    }
    std::cout << "seed " << o.seed << ", acceptance " << format_double(res.state.acceptance_rate()) << ", snapshots " << res.snapshots << "\n";
    if (r.plot) write_svg_plot(r.path("histogram.svg"), "sampled density vs equilibrium", {{"sample", "#7f7f7f", ph, true}, {"rho", "#d62728", pe, false}});
    return 0;
}

int cmd_curve_info(const Run& r) {
    const auto& c = r.cfg;
    if (cuts_requested(c) < 2) throw model_mismatch("curve-info needs cuts_hint >= 2 (a one-cut curve has genus 0)");
    const auto s = solve(c, false);
    const auto model = MultiCutModel::build(c.potential, s.meas, s.optimum->zeta);
    const int g = model.curve.genus();
    {
        CsvWriter w(r.path("tau.csv"), r.stamp, {"i", "j", "Re_tau", "Im_tau"});
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) w.row(i, j, model.pd.tau(i, j).real(), model.pd.tau(i, j).imag());
    }
    std::vector<std::string> cols{"xi", "sheet"};
    for (int i = 0; i < g; ++i) {
        cols.push_back("Re_u" + std::to_string(i));
        cols.push_back("Im_u" + std::to_string(i));
    }
    CsvWriter w(r.path("abel.csv"), r.stamp, cols);
    auto dump = [&](const std::string& label, int sheet, const cvec& u) {
        std::vector<std::string> f{label, std::to_string(sheet)};
        for (int i = 0; i < g; ++i) {
            f.push_back(format_double(u(i).real()));
            f.push_back(format_double(u(i).imag()));
        }
        return f;
    };
    const auto roots = model.curve.roots();
    for (double xi : c.run.grid.points()) {
        if (std::find(roots.begin(), roots.end(), xi) != roots.end()) continue;
        w.row_fields(dump(format_double(xi), 1, abel_map(model.curve, model.pd, SurfacePoint::at(cplx(xi, 0.0)))));
    }
    w.row_fields(dump("inf", 1, model.geo.u_inf_plus));
    w.row_fields(dump("inf", -1, model.geo.u_inf_minus));
    std::cout << "genus " << g << ", branch points:";
    for (double b : roots) std::cout << ' ' << format_double(b);
    std::cout << "\ntau:";
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) std::cout << ' ' << format_double(model.pd.tau(i, j).real()) << (model.pd.tau(i, j).imag() < 0 ? "" : "+") << format_double(model.pd.tau(i, j).imag()) << "i";
    std::cout << "\nfillings:";
    for (double e : s.meas.fillings) std::cout << ' ' << format_double(e);
    std::cout << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"opasym: orthogonal-polynomial asymptotics from matrix-model saddle points"};
    app.require_subcommand(1);
    std::string config_path, out_dir = ".";
    std::optional<long> seed;
    std::optional<int> precision;
    bool plot = false;
    const std::vector<std::string> names{"equilibrium", "exact", "asym", "compare", "sample", "curve-info"};
    for (const auto& n : names) {
        auto* sub = app.add_subcommand(n);
        sub->add_option("--config", config_path, "JSON run description")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--plot", plot, "also write SVG plots");
        sub->add_option("--seed", seed, "RNG seed (overrides the config)");
        sub->add_option("--precision", precision, "working precision in digits (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        Run r{load_config(config_path), {}, false, {}};
        if (seed) {
            if (*seed < 0) throw config_error("--seed", "must be >= 0");
            r.cfg.run.seed = static_cast<std::uint64_t>(*seed);
            r.cfg.run.seed_given = true;
        }
        if (precision) {
            if (*precision < 15) throw config_error("--precision", "must be >= 15");
            r.cfg.run.precision_digits = *precision;
        }
        r.out = out_dir;
        fs::create_directories(r.out);
        r.plot = plot;
        r.stamp = "config_hash=" + hex64(config_hash(r.cfg)) + " seed=" + std::to_string(r.cfg.run.seed) + " command=" + cmd;
        if (cmd == "equilibrium") return cmd_equilibrium(r);
        if (cmd == "exact") return cmd_exact(r);
        if (cmd == "asym") return cmd_asym(r);
        if (cmd == "compare") return cmd_compare(r);
        if (cmd == "sample") return cmd_sample(r);
        return cmd_curve_info(r);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const model_mismatch& e) {
        std::cerr << "model mismatch: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
}
