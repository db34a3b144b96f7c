#include "cfphase/commands.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>

namespace cfphase {

namespace fs = std::filesystem;

namespace {

constexpr double kHolderSlack = 1.05;

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::ios_base::failure("cannot write '" + path.string() + "'");
    out.exceptions(std::ios::failbit | std::ios::badbit);
    return out;
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::ios_base::failure("cannot create directory '" + dir.string() + "'");
}

std::string num(double v) { return std::isnan(v) ? "nan" : format_number(v); }

// Shortest round-trip text, for directory names.
std::string short_num(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : num(v);
}

std::string coupling_name(CouplingMode m)
{
    switch (m) {
    case CouplingMode::Direct:
        return "direct";
    case CouplingMode::Mollified:
        return "mollified";
    case CouplingMode::Picard:
        return "picard";
    }
    return "direct";
}

nlohmann::ordered_json config_json(const RunConfig& c)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.echo)
        j[k] = v;
    return j;
}

struct RunVerdicts {
    bool max_principle = true;
    bool monitors_well_formed = true;
    bool holder_43 = true;
    bool reaction_gap = true;

    bool all() const { return max_principle && monitors_well_formed && holder_43 && reaction_gap; }
};

RunVerdicts verdicts_of(const RunResult& r, double kappa)
{
    RunVerdicts v;
    v.max_principle = r.max_principle.holds;
    v.monitors_well_formed = r.monitors.empty() || r.monitors.well_formed();
    if (!r.monitors.empty())
        v.holder_43 = r.monitors.final().dissipation_43 <=
                      kHolderSlack * holder_bound_43(r.monitors.final());
    v.reaction_gap = reaction_gap(r.traj, kappa).holds;
    return v;
}

void write_meta(const fs::path& path, const nlohmann::ordered_json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

} // namespace

const std::vector<std::string>& snapshot_columns()
{
    static const std::vector<std::string> cols = {"t", "x", "S", "u1", "u2", "u3", "T_dot_epsbar"};
    return cols;
}

const std::vector<std::string>& sweep_columns(int family_size)
{
    static std::vector<std::string> cols;
    static int built_for = -1;
    if (built_for != family_size) {
        cols = {"kappa", "status", "steps"};
        for (const auto& name : MonitorRow::column_names())
            if (name != "t")
                cols.push_back("final_" + std::string(name));
        cols.insert(cols.end(), {"compactness_distance", "flux_distance", "weak_residual_max"});
        for (int k = 0; k < family_size; ++k)
            cols.push_back("weak_residual_" + std::to_string(k));
        cols.insert(cols.end(), {"reaction_gap", "reaction_gap_bound", "max_principle_holds"});
        built_for = family_size;
    }
    return cols;
}

void write_run_outputs(const fs::path& dir, const RunConfig& config, const RunResult& result,
                       const std::string& status)
{
    make_dir(dir);
    const ModelParams& p = config.params;
    const Grid& grid = result.traj.grid();
    const ElasticityOperator op(p.stiffness, p.misfit, grid);
    const BodyForce b = config.body_force.build(p.a, p.d);

    {
        auto out = open_out(dir / "snapshots.csv");
        const auto& cols = snapshot_columns();
        for (std::size_t k = 0; k < cols.size(); ++k)
            out << (k ? "," : "") << cols[k];
        out << '\n';
        const auto& snaps = result.traj.snapshots();
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            const bool last = k + 1 == snaps.size();
            if (k % static_cast<std::size_t>(config.emit_stride) != 0 && !last)
                continue;
            const double t = snaps[k].t;
            const CorrectionPair corr = b.kind == BodyForce::Kind::Zero
                                            ? op.zero_correction()
                                            : op.solve_correction(b.sample(t, grid));
            const Vec3Field u = op.assemble_displacement(result.effective[k], corr);
            for (std::size_t i = 0; i < grid.nodes(); ++i) {
                out << num(t) << ',' << num(grid.x(static_cast<int>(i))) << ','
                    << num(snaps[k].S[i]) << ',' << num(u[i](0)) << ',' << num(u[i](1)) << ','
                    << num(u[i](2)) << ',' << num(result.coupling[k][i]) << '\n';
            }
        }
    }
    {
        auto out = open_out(dir / "monitors.csv");
        const auto& names = MonitorRow::column_names();
        for (std::size_t k = 0; k < names.size(); ++k)
            out << (k ? "," : "") << names[k];
        out << '\n';
        for (const auto& row : result.monitors.rows) {
            const auto v = row.values();
            for (std::size_t k = 0; k < v.size(); ++k)
                out << (k ? "," : "") << num(v[k]);
            out << '\n';
        }
    }

    const RunVerdicts v = verdicts_of(result, p.kappa);
    double elastic_residual = 0.0;
    for (const auto& r : result.reports)
        elastic_residual = std::max(elastic_residual, r.elasticity_residual);

    nlohmann::ordered_json j;
    j["status"] = status;
    j["config"] = config_json(config);
    j["kernel"] = {{"bump_normalization", bump_normalization()},
                   {"coupling", coupling_name(config.solver.coupling)},
                   {"truncated", result.kernel_truncated}};
    j["steps"] = result.steps;
    j["final_time"] = result.traj.end_time();
    j["snapshots"] = result.traj.size();
    j["max_principle"] = {{"initial_max", result.max_principle.initial_max},
                          {"observed_max", result.max_principle.observed_max},
                          {"tolerance", MaxPrincipleReport::kTolerance},
                          {"holds", result.max_principle.holds}};
    j["elasticity_residual_max"] = elastic_residual;
    if (!result.picard_distances.empty())
        j["picard_distances"] = result.picard_distances;
    j["verdicts"] = {{"max_principle", v.max_principle},
                     {"monitors_well_formed", v.monitors_well_formed},
                     {"holder_43", v.holder_43},
                     {"reaction_gap", v.reaction_gap}};
    write_meta(dir / "meta.json", j);
}

int run_command(const RunConfig& config, std::ostream& log)
{
    const fs::path dir = config.output_dir;
    std::optional<RunResult> ran;
    try {
        ran = run(config.initial_data(), config.params, config.solver,
                     config.body_force.build(config.params.a, config.params.d));
    } catch (const SolverError& e) {
        log << "solver aborted: " << e.what() << '\n';
        try {
            make_dir(dir);
            nlohmann::ordered_json j;
            j["status"] = "solver_error";
            j["message"] = e.what();
            j["step"] = e.step();
            j["time"] = e.time();
            j["config"] = config_json(config);
            write_meta(dir / "meta.json", j);
        } catch (const std::exception& io) {
            log << "error: " << io.what() << '\n';
            return kExitIo;
        }
        return e.kind() == SolverError::Kind::BadInput ? kExitUsage : kExitSolver;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    const RunResult& result = *ran;
    const RunVerdicts v = verdicts_of(result, config.params.kappa);
    try {
        write_run_outputs(dir, config, result, v.all() ? "ok" : "invariant_violation");
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    }
    log << "run: " << result.steps << " steps to t = " << num(result.traj.end_time())
        << ", max|S| = " << num(result.max_principle.observed_max) << " (initial "
        << num(result.max_principle.initial_max) << ")\n";
    if (!v.all()) {
        log << "invariant violation:" << (v.max_principle ? "" : " max_principle")
            << (v.monitors_well_formed ? "" : " monitors") << (v.holder_43 ? "" : " holder_43")
            << (v.reaction_gap ? "" : " reaction_gap") << '\n';
        return kExitInvariant;
    }
    return kExitOk;
}

int sweep_command(const RunConfig& config, const std::vector<double>& kappas, std::ostream& log)
{
    const fs::path dir = config.output_dir;
    SweepSetup setup{config.initial_data()};
    setup.body_force = config.body_force.build(config.params.a, config.params.d);
    setup.config = config.solver;
    SweepReport report;
    try {
        report = kappa_sweep(config.params, kappas, setup);
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    const int family = setup.family_m * setup.family_n;
    bool invariants = true;
    try {
        make_dir(dir);
        auto out = open_out(dir / "sweep.csv");
        const auto& cols = sweep_columns(family);
        for (std::size_t k = 0; k < cols.size(); ++k)
            out << (k ? "," : "") << cols[k];
        out << '\n';
        for (std::size_t k = 0; k < report.entries.size(); ++k) {
            const SweepEntry& e = report.entries[k];
            out << num(e.kappa) << ',' << (e.ok ? "ok" : "failed") << ','
                << (e.ok ? std::to_string(e.result->steps) : "");
            const auto values = e.final_row.values();
            for (std::size_t c = 1; c < values.size(); ++c)
                out << ',' << (e.ok ? num(values[c]) : "");
            const bool has_next = k < report.compactness.size();
            out << ',' << (has_next ? num(report.compactness[k]) : "") << ','
                << (has_next ? num(report.flux[k]) : "");
            double worst = 0.0;
            for (double w : e.weak_residuals)
                worst = std::max(worst, std::abs(w));
            out << ',' << (e.ok ? num(worst) : "");
            for (int m = 0; m < family; ++m)
                out << ','
                    << (e.ok ? num(e.weak_residuals[static_cast<std::size_t>(m)]) : "");
            out << ',' << (e.ok ? num(e.gap.value) : "") << ',' << (e.ok ? num(e.gap.bound) : "")
                << ',' << (e.ok ? (e.result->max_principle.holds ? "1" : "0") : "") << '\n';
        }

        nlohmann::ordered_json j;
        j["config"] = config_json(config);
        j["kappas"] = kappas;
        j["all_ok"] = report.all_ok();
        j["compactness_strictly_decreasing"] = report.compactness_strictly_decreasing();
        nlohmann::ordered_json uni = nlohmann::ordered_json::array();
        for (const auto& u : report.uniformity)
            uni.push_back({{"monitor", u.monitor},
                           {"min", u.min},
                           {"max", u.max},
                           {"ratio", u.ratio},
                           {"factor", SweepReport::kUniformityFactor},
                           {"holds", u.holds}});
        j["uniformity"] = uni;
        nlohmann::ordered_json failures = nlohmann::ordered_json::array();
        for (const auto& e : report.entries)
            if (!e.ok)
                failures.push_back({{"kappa", e.kappa}, {"error", e.error}});
        j["failures"] = failures;
        write_meta(dir / "meta.json", j);

        for (const auto& e : report.entries) {
            if (!e.ok) {
                log << "kappa " << num(e.kappa) << " failed: " << e.error << '\n';
                continue;
            }
            RunConfig sub = config;
            sub.params.kappa = e.kappa;
            for (auto& [k, v] : sub.echo)
                if (k == "kappa")
                    v = num(e.kappa);
            const RunVerdicts v = verdicts_of(*e.result, e.kappa);
            invariants = invariants && v.all();
            write_run_outputs(dir / ("kappa_" + short_num(e.kappa)), sub, *e.result,
                              v.all() ? "ok" : "invariant_violation");
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    }

    log << "sweep: " << report.entries.size() << " kappa values, compactness distances";
    for (double d : report.compactness)
        log << ' ' << num(d);
    log << (report.compactness_strictly_decreasing() ? " (strictly decreasing)" : " (not decreasing)")
        << '\n';
    if (!report.all_ok())
        return kExitPartial;
    return invariants ? kExitOk : kExitInvariant;
}

int mms_command(const RunConfig& config, std::ostream& log)
{
    const fs::path dir = config.output_dir;
    OrderReport report;
    try {
        report = manufactured_run(ManufacturedSolution{config.mms_amplitude}, config.params,
                                  config.solver, config.mms_levels);
    } catch (const SolverError& e) {
        log << "solver aborted: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    constexpr double kMinOrder = 0.9;
    const bool exact = std::all_of(report.errors.begin(), report.errors.end(),
                                   [](double e) { return e == 0.0; });
    const bool order_ok = exact || report.orders.empty() || report.min_order() >= kMinOrder;
    try {
        make_dir(dir);
        auto out = open_out(dir / "mms.csv");
        out << "cells,steps,l2q_error,observed_order\n";
        for (std::size_t k = 0; k < report.cells.size(); ++k)
            out << report.cells[k] << ',' << report.steps[k] << ',' << num(report.errors[k]) << ','
                << (k == 0 ? "" : num(report.orders[k - 1])) << '\n';
        nlohmann::ordered_json j;
        j["config"] = config_json(config);
        j["levels"] = report.cells;
        j["errors"] = report.errors;
        j["orders"] = report.orders;
        j["min_order_required"] = kMinOrder;
        j["order_ok"] = order_ok;
        write_meta(dir / "meta.json", j);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    }
    for (std::size_t k = 0; k < report.cells.size(); ++k) {
        log << "N = " << report.cells[k] << "  error = " << num(report.errors[k]);
        if (k > 0)
            log << "  order = " << num(report.orders[k - 1]);
        log << '\n';
    }
    return order_ok ? kExitOk : kExitInvariant;
}

} // namespace cfphase
