// lsd: scenario-driven runs of the deformation pipeline.
//
// Exit status: 0 all checks passed, 2 a check failed, 1 execution or configuration error.

#include "lsd/commlab.hpp"
#include "lsd/io.hpp"
#include "lsd/pipeline.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsd;

namespace {

struct Context {
    Pipeline pipe;
    RunManifest manifest;
    std::string stage;
    json checks = json::object();
    bool ok = true;

    Context(Scenario s, const std::string& out, std::string stage_name)
        : pipe(std::move(s)), manifest(out), stage(std::move(stage_name)) {
        manifest.set_scenario(pipe.scenario().hash(), pipe.scenario().canonical);
    }

    void check(const std::string& name, bool pass, const json& value = nullptr) {
        checks[name] = {{"pass", pass}, {"value", value}};
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << name;
        if (!value.is_null()) std::cout << "  " << value.dump();
        std::cout << '\n';
    }

    std::string file(const std::string& name) const { return manifest.path_for(name).string(); }
    void record(const std::string& name) { manifest.add_file(name, stage); }
    void record_json(const std::string& name, const json& j) {
        write_json(manifest.path_for(name), j);
        record(name);
    }
};

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

std::string theta_tag(cplx t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g%+gi", t.real(), t.imag());
    return buf;
}

SpectrumReport classified_spectrum(Context& c, const FiberOperator& op, bool keep_vectors = false) {
    SpectrumReport r = eigendecompose(op, c.pipe.scenario().tol.eig_tol, keep_vectors);
    ClassifierOptions co;
    co.match_tol = c.pipe.scenario().tol.match_tol;
    classify(r, op, co);
    return r;
}

void write_spectrum(Context& c, const SpectrumReport& r) {
    const std::string name = r.file_stem() + ".csv";
    r.write_csv(c.file(name));
    c.record(name);
}

Rectangle require_rectangle(Context& c, double xi) {
    if (!c.pipe.scenario().rectangle.present)
        fail(ErrorKind::ConfigError, "key 'rectangle' is required by " + c.stage);
    return c.pipe.rectangle(xi);
}

json rect_json(const Rectangle& r) {
    return {{"center", r.center}, {"half_width", r.half_width}, {"depth_slope", r.depth_slope}};
}

int cmd_certify(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    const Constants& k = p.constants(true);
    c.manifest.set_constants(k.to_json());
    json out = {{"constants", k.to_json()}};
    for (int j = 0; j < 2; ++j) {
        const DispersionSpec& d = j == 0 ? p.pair().first : p.pair().second;
        if (d.is_constant()) continue;
        const GrowthReport g = check_growth(d, s.K, s.certify.resolution);
        const std::string name = j == 0 ? "growth_first" : "growth_second";
        out[name] = {{"lower_margin", g.worst_lower_margin}, {"upper_margin", g.worst_upper_margin}};
        c.check(name, g.ok(), out[name]);
    }
    c.check("admissible_radius_positive", k.R > 0.0, k.R);
    const double xi = p.xi_values().front();
    const cplx theta = s.theta.front();
    const FiberOperator h0 = p.assemble(xi, 0.0);
    const FiberOperator ht = p.assemble(xi, theta);
    const KernelNormReport kn = dilated_kernel_norm_check(ht, p.bounds(), p.kernel());
    out["kernel_norm"] = {{"norm", kn.norm}, {"bound", kn.bound}, {"C_d", kn.c_d}};
    c.check("kernel_norm_bound", kn.ok(), out["kernel_norm"]);
    const RelativeBoundReport rb = relative_bound_check(ht, h0, k.C);
    out["relative_bound"] = {
        {"w_norm", rb.w_norm}, {"bound", rb.bound}, {"ratio_min", rb.ratio_min}, {"ratio_max", rb.ratio_max}};
    c.check("relative_bound", rb.ok(), out["relative_bound"]);
    c.record_json("certify.json", out);
    return 0;
}

int cmd_assemble(Context& c) {
    auto& p = c.pipe;
    for (double xi : p.xi_values()) {
        for (cplx theta : p.scenario().theta) {
            const std::string tag = "xi" + fmt17(xi) + "_theta" + theta_tag(theta);
            if (theta != 0.0) {
                const FlowTable t = build_deformation_table(p.grid(), p.flow_problem(xi), theta);
                t.write_csv(c.file("flow_" + tag + ".csv"));
                c.record("flow_" + tag + ".csv");
            }
            const FiberOperator op = p.assemble(xi, theta);
            write_matrix_binary(op.matrix, 1, c.file("H_" + tag + ".bin"));
            c.record("H_" + tag + ".bin");
            const FiberOperator oc = p.assemble(xi, std::conj(theta));
            const double defect = adjoint_defect(op, oc);
            const double scale = std::max(1.0, op.matrix.cwiseAbs().maxCoeff());
            c.check("adjoint_identity_" + tag, defect <= 1e-13 * scale, defect / scale);
        }
    }
    return 0;
}

int cmd_spectrum(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    json summaries = json::array();
    const bool deformed = std::any_of(s.theta.begin(), s.theta.end(), [](cplx t) { return t != 0.0; });
    const double C = deformed ? p.constants(true).C : 0.0;
    if (deformed) c.manifest.set_constants(p.constants(true).to_json());
    for (double xi : p.xi_values()) {
        for (cplx theta : s.theta) {
            const FiberOperator op = p.assemble(xi, theta);
            SpectrumReport r = classified_spectrum(c, op);
            if (s.rectangle.present) {
                std::vector<cplx> exclude;
                if (s.potential.family == "embedded") exclude.push_back(s.potential.xi0 * s.potential.xi0);
                r.rectangle_stats = rectangle_scan(r, p.rectangle(xi), exclude, 1e-3);
            }
            write_spectrum(c, r);
            json sm = r.summary();
            const std::string tag = "xi" + fmt17(xi) + "_theta" + theta_tag(theta);
            c.check("residuals_" + tag, r.flagged_count() == 0, r.flagged_count());
            if (theta != 0.0) {
                const SectorReport sec = sector_check(r, C, theta);
                sm["sector"] = {{"violations", sec.violations}, {"worst_margin", sec.worst_margin}, {"C", C}};
                c.check("sector_" + tag, sec.violations == 0, sec.violations);
            }
            if (theta == 0.0 && p.potential().is_zero()) {
                std::vector<double> a(r.size()), b(r.size());
                for (std::size_t i = 0; i < r.size(); ++i) {
                    a[i] = r.eigenvalues[i].real();
                    b[i] = op.multiplication[i].real();
                }
                std::sort(a.begin(), a.end());
                std::sort(b.begin(), b.end());
                c.check("free_diagonal_" + tag, a == b);
            }
            summaries.push_back(sm);
        }
    }
    c.record_json("spectrum_summary.json", summaries);
    return 0;
}

int cmd_sweep_theta(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    const double xi = p.xi_values().front();
    const Rectangle rect = require_rectangle(c, xi);
    std::vector<SpectrumReport> reports;
    for (cplx theta : s.theta) {
        if (theta == 0.0) continue;
        const FiberOperator op = p.assemble(xi, theta);
        reports.push_back(classified_spectrum(c, op));
        write_spectrum(c, reports.back());
    }
    require(reports.size() >= 2, ErrorKind::ConfigError, "key 'theta' needs at least two non-zero values for sweep-theta");
    std::vector<const SpectrumReport*> ptrs;
    for (const auto& r : reports) ptrs.push_back(&r);
    const DriftTable dt = theta_independence(ptrs, rect, 1e-3, rect.half_width);
    std::ofstream f(c.file("drift.csv"));
    f << "theta_from,theta_to,max_isolated_drift,isolated_tracked,median_continuum_drift,continuum_tracked\n";
    for (const auto& row : dt.rows)
        f << theta_tag(row.theta_from) << ',' << theta_tag(row.theta_to) << ',' << fmt17(row.max_isolated_drift) << ','
          << row.isolated_tracked << ',' << fmt17(row.median_continuum_drift) << ',' << row.continuum_tracked << '\n';
    f.close();
    c.record("drift.csv");
    bool tracked = !dt.rows.empty();
    for (const auto& row : dt.rows) tracked = tracked && row.isolated_tracked > 0;
    c.check("isolated_tracked", tracked);
    c.check("isolated_drift", tracked && dt.max_isolated_drift() <= s.tol.drift_tol, dt.max_isolated_drift());
    c.check("continuum_moves", dt.min_median_continuum_drift() > 1e-3, dt.min_median_continuum_drift());
    return 0;
}

int cmd_sweep_xi(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    if (!s.sweep.present) fail(ErrorKind::ConfigError, "key 'sweep' is required by sweep-xi");
    const Rectangle rect = require_rectangle(c, s.xi.front());
    const BandData band = band_sweep(p.band_factory(), s.sweep.values(), rect, p.band_options());
    band.write_csv(c.file("bands.csv"));
    c.record("bands.csv");
    json fits = json::array();
    bool constant_mult = true;
    for (const auto& b : band.branches) {
        for (const auto& smp : b.samples) constant_mult = constant_mult && smp.multiplicity == b.samples[0].multiplicity;
        json f = {{"branch_id", b.id}, {"samples", b.samples.size()}};
        if (b.samples.size() >= 5) {
            const FitReport fr = branch_regularity(band, b.id, 2);
            f["residuals"] = fr.residuals;
            if (fr.meeting_point) f["puiseux_order"] = fr.puiseux_order;
        }
        fits.push_back(f);
    }
    c.record_json("bands.json", {{"rectangle", rect_json(rect)},
                                 {"parameter", s.sweep.parameter},
                                 {"branches", fits},
                                 {"gaps", band.gaps}});
    c.check("no_gaps", band.gaps.empty(), band.gaps);
    c.check("constant_multiplicity", constant_mult);
    return 0;
}

int cmd_thresholds(Context& c) {
    auto& p = c.pipe;
    std::vector<ThresholdSet> sets;
    std::size_t dropped = 0;
    bool verified = true;
    for (double xi : p.xi_values()) {
        sets.push_back(p.thresholds(xi));
        dropped += sets.back().dropped_seeds;
        const CPoint x = CPoint::Constant(1, xi);
        for (double k : sets.back().critical_points)
            verified = verified && std::abs(grad_omega_xi(p.pair(), x, CPoint::Constant(1, k))[0]) <= 1e-10;
    }
    write_thresholds_csv(sets, c.file("thresholds.csv"));
    c.record("thresholds.csv");
    c.check("critical_points_verified", verified);
    c.record_json("thresholds.json", {{"grid_points", sets.size()}, {"dropped_seeds", dropped}});
    return 0;
}

int cmd_mourre(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    const double xi = p.xi_values().front();
    const double lambda = s.mourre.lambda;
    const CPoint x = CPoint::Constant(1, xi);
    const CommutatorMatrix com = assemble_commutator(p.grid(), p.pair(), p.potential(), x, x);
    const FiberOperator h = p.assemble(xi, 0.0);

    // point spectrum near lambda from the deformed operator
    std::vector<double> points;
    const cplx theta = s.theta.front();
    if (theta != 0.0) {
        const SpectrumReport r = classified_spectrum(c, p.assemble(xi, theta));
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r.classes[i] == SpectralClass::IsolatedReal) points.push_back(r.eigenvalues[i].real());
    }
    MourreOptions mo;
    mo.shell_step = s.mourre.shell_step;
    mo.point_spectrum = points;
    MourreReport rep = extract_constants(p.grid(), p.pair(), p.potential(), lambda, x, p.thresholds(xi).critical_values,
                                         mo, &com);

    // P0 from the Hermitian eigenvectors at the point spectrum inside the window
    const HermitianSystem hs = eig_hermitian(h.matrix, true);
    std::vector<Eigen::Index> cols;
    for (double pt : points) {
        if (std::abs(pt - lambda) > rep.kappa) continue;
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < hs.values.size(); ++i)
            if (std::abs(hs.values[i] - pt) < std::abs(hs.values[best] - pt)) best = i;
        cols.push_back(best);
    }
    MatrixXcd p0(h.size(), Eigen::Index(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) p0.col(Eigen::Index(j)) = hs.vectors.col(cols[j]);
    rep.virial_residuals = virial_check(com, p0);
    const MourreMargin mm = mourre_inequality_check(com, h.matrix, rep, cols.empty() ? nullptr : &p0);

    json out = rep.to_json();
    out["margin"] = mm.margin;
    out["window_states"] = mm.window_states;
    out["with_p0"] = mm.with_p0;
    out["commutator_hermitian_defect"] = com.hermitian_defect();
    c.record_json("mourre.json", out);
    c.check("mourre_e_positive", rep.e > 0.0, rep.e);
    c.check("mourre_margin", mm.margin >= -s.tol.mourre_margin, mm.margin);
    return 0;
}

int cmd_feshbach(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    const double xi = p.xi_values().front();
    const cplx theta = s.theta.front();
    const FiberOperator op = p.assemble(xi, theta);
    const SpectrumReport r = classified_spectrum(c, op);
    cplx mu;
    if (s.feshbach.mu) {
        // snap to the nearest computed eigenvalue
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < r.eigenvalues.size(); ++i)
            if (std::abs(r.eigenvalues[i] - *s.feshbach.mu) < std::abs(r.eigenvalues[best] - *s.feshbach.mu)) best = i;
        mu = r.eigenvalues[best];
    } else {
        const auto found = isolated_in_rectangle(r, require_rectangle(c, xi));
        if (!found) {
            c.check("in_rectangle_eigenvalue", false);
            return 0;
        }
        mu = *found;
    }
    const FeshbachAnalysis fa = feshbach_analysis(op.matrix, mu, s.feshbach.contour_radius, s.feshbach.nodes,
                                                  s.feshbach.probe_offset);
    c.record_json("feshbach.json", fa.to_json());
    c.check("riesz_rank_one", fa.rank == 1, fa.rank);
    c.check("riesz_idempotent", fa.idempotency_defect <= 1e-8, fa.idempotency_defect);
    c.check("riesz_stable", fa.rank_stable(), fa.rank);
    c.check("det_vanishes", fa.abs_det_at_mu <= 1e-8, fa.abs_det_at_mu);
    c.check("det_probes", fa.min_probe() >= 1e-3, fa.min_probe());
    c.check("winding_matches_rank", fa.winding_number == fa.rank, fa.winding_number);
    return 0;
}

int cmd_embedded(Context& c) {
    auto& p = c.pipe;
    const auto& s = p.scenario();
    if (s.potential.family != "embedded") fail(ErrorKind::ConfigError, "key 'potential.family' must be embedded");
    const EmbeddedConstruction& e = *p.embedded();
    save_sampled(*e.spec.sampled, c.file("potential.csv"), c.file("potential.json"));
    c.record("potential.csv");
    c.record("potential.json");
    c.check("construction_residual", e.residual <= s.tol.residual_tol, e.residual);
    const double xi = p.xi_values().front();
    const Rectangle rect = require_rectangle(c, xi);
    json runs = json::array();
    for (cplx theta : s.theta) {
        if (theta == 0.0) continue;
        const FiberOperator op = p.assemble(xi, theta);
        SpectrumReport r = classified_spectrum(c, op);
        r.rectangle_stats = rectangle_scan(r, rect, {cplx(e.target)}, 1e-3);
        write_spectrum(c, r);
        const auto found = isolated_in_rectangle(r, rect);
        const std::string tag = theta_tag(theta);
        const bool hit = found && std::abs(found->imag()) <= 1e-6 && std::abs(found->real() - e.target) <= 1e-3;
        c.check("embedded_eigenvalue_" + tag, hit, found ? cjson(*found) : json(nullptr));
        c.check("no_strays_" + tag, r.rectangle_stats->stray_count() == 0, r.rectangle_stats->stray_count());
        runs.push_back({{"theta", cjson(theta)},
                        {"eigenvalue", found ? cjson(*found) : json(nullptr)},
                        {"strays", r.rectangle_stats->stray_count()}});
    }
    c.record_json("embedded.json", {{"target", e.target},
                                    {"residual", e.residual},
                                    {"residual_stride", e.residual_stride},
                                    {"rectangle", rect_json(rect)},
                                    {"runs", runs}});
    return 0;
}

int cmd_commlab(Context& c) {
    const auto& cl = c.pipe.scenario().commlab;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < cl.seeds; ++i) seeds.push_back(cl.first_seed + std::uint64_t(i));
    BatchOptions bo;
    bo.n = cl.n;
    bo.k_max = cl.k_max;
    bo.radius_fraction = cl.radius_fraction;
    const auto res = commlab_batch(seeds, bo);
    json out = batch_json(res);
    const CommutatorLadder pl = ladder(pauli_pair(), 40);
    out["pauli_C"] = pl.growth_constant;
    c.record_json("commlab.json", out);
    double worst = 0.0, worst_ratio = 0.0;
    std::size_t viol = 0;
    for (const auto& r : res) {
        worst = std::max(worst, r.series_deviation);
        worst_ratio = std::max(worst_ratio, r.w_ratio);
        viol += r.sector_violations;
    }
    c.check("series_matches_conjugation", worst <= c.pipe.scenario().tol.series_tol, worst);
    c.check("w_theta_bound", worst_ratio <= 1.0, worst_ratio);
    c.check("finite_sector", viol == 0, viol);
    return 0;
}

// Plot-ready files from whatever stages the run directory holds.
int cmd_plot_data(const fs::path& dir) {
    if (!fs::exists(dir / "run_manifest.json")) fail(ErrorKind::MissingStage, "no run manifest in " + dir.string());
    RunManifest m(dir);
    const json files = m.json().at("files");
    int made = 0;
    auto emit = [&](const std::string& src, const std::string& dst, const std::vector<std::string>& keep) {
        std::ifstream in(dir / src);
        std::string header, line;
        std::getline(in, header);
        std::vector<std::string> cols;
        {
            std::stringstream hs(header);
            std::string h;
            while (std::getline(hs, h, ',')) cols.push_back(h);
        }
        std::vector<std::size_t> idx;
        for (const auto& k : keep) idx.push_back(std::size_t(std::find(cols.begin(), cols.end(), k) - cols.begin()));
        std::ofstream out(dir / dst);
        for (std::size_t i = 0; i < keep.size(); ++i) out << (i ? "," : "") << keep[i];
        out << '\n';
        while (std::getline(in, line)) {
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string v;
            while (std::getline(ls, v, ',')) f.push_back(v);
            for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? "," : "") << (idx[i] < f.size() ? f[idx[i]] : "");
            out << '\n';
        }
        out.close();
        m.add_file(dst, "plot-data");
        ++made;
    };
    fs::create_directories(dir / "plot");
    for (const auto& [name, rec] : files.items()) {
        if (name.rfind("spectrum_", 0) == 0 && name.size() > 4 && name.substr(name.size() - 4) == ".csv")
            emit(name, "plot/scatter_" + name.substr(9), {"re", "im", "class"});
        else if (name == "bands.csv")
            emit(name, "plot/band_curves.csv", {"xi", "branch_id", "re_lambda", "im_lambda"});
        else if (name == "thresholds.csv")
            emit(name, "plot/threshold_overlay.csv", {"xi", "critical_value"});
    }
    if (made == 0) fail(ErrorKind::MissingStage, "run directory holds no spectrum, band or threshold data");
    m.stage("plot-data", "ok", 0.0, {{"files", made}});
    m.save();
    std::cout << "wrote " << made << " plot files\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral deformation toolkit for two-body fiber Hamiltonians"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string scenario_path, out_dir;
    std::vector<std::string> overrides;
    int workers = 0;
    app.add_option("--scenario", scenario_path, "scenario JSON file");
    app.add_option("--out", out_dir, "run directory (default: scenario output under $LSD_OUTPUT_ROOT)");
    app.add_option("--workers", workers, "OpenMP threads")->check(CLI::PositiveNumber);
    app.add_option("--override", overrides, "key.path=value, repeatable");

    using Handler = int (*)(Context&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"certify", "dispersion / potential constants and relative bounds", cmd_certify},
        {"assemble", "flow tables and deformed matrices", cmd_assemble},
        {"spectrum", "eigenvalues, classes and sector check", cmd_spectrum},
        {"sweep-theta", "theta independence of isolated eigenvalues", cmd_sweep_theta},
        {"sweep-xi", "band tracking over the sweep block", cmd_sweep_xi},
        {"thresholds", "threshold sets over xi", cmd_thresholds},
        {"mourre", "Mourre constants and inequality", cmd_mourre},
        {"feshbach", "Riesz projection and Feshbach determinant", cmd_feshbach},
        {"embedded", "embedded-eigenvalue construction and verification", cmd_embedded},
        {"commlab", "finite-dimensional commutator checks", cmd_commlab},
    };
    for (const auto& [name, desc, h] : commands) app.add_subcommand(name, desc);
    app.add_subcommand("plot-data", "plot-ready CSV files from a run directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (workers > 0) omp_set_num_threads(workers);

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "plot-data") {
            if (out_dir.empty()) {
                if (scenario_path.empty()) fail(ErrorKind::ConfigError, "plot-data needs --out or --scenario");
                out_dir = resolve_output_dir(load_scenario(scenario_path, overrides), "");
            }
            return cmd_plot_data(out_dir);
        }
        if (scenario_path.empty()) fail(ErrorKind::ConfigError, "--scenario is required");
        Scenario s = load_scenario(scenario_path, overrides);
        const std::string dir = resolve_output_dir(s, out_dir);
        Context ctx(std::move(s), dir, cmd);
        const auto t0 = std::chrono::steady_clock::now();
        Handler h = nullptr;
        for (const auto& [name, desc, fn] : commands)
            if (name == cmd) h = fn;
        h(ctx);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ctx.manifest.stage(cmd, ctx.ok ? "pass" : "fail", secs, ctx.checks);
        ctx.manifest.save();
        std::cout << cmd << ": " << (ctx.ok ? "all checks passed" : "check failure") << " (" << dir << ")\n";
        return ctx.ok ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
