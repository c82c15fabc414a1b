// Command-line front end: optimal percentile mechanisms, welfare evaluation,
// and Monte Carlo experiment pipelines (JSON results, CSV plot data).
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flpsr/flpsr.hpp"
#include "flpsr/spec_json.hpp"

using json = nlohmann::ordered_json;

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

flpsr::Distribution load_distribution(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg.front() != '{') {
        std::ifstream in(arg);
        if (!in) throw std::invalid_argument("cannot open distribution spec file: " + arg);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return flpsr::build(flpsr::spec_from_json_text(text));
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
    out << content;
}

// "20..100:10", "2..6" (step 1), or a comma list "50,100,200"
std::vector<double> parse_list(const std::string& text) {
    std::vector<double> vals;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const double start = std::stod(text.substr(0, dots));
        std::string rest = text.substr(dots + 2);
        double step = 1.0;
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            step = std::stod(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        const double end = std::stod(rest);
        if (!(step > 0.0) || end < start) throw std::invalid_argument("bad range: " + text);
        for (double v = start; v <= end + 1e-9; v += step) vals.push_back(v);
        return vals;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) vals.push_back(std::stod(tok));
    }
    if (vals.empty()) throw std::invalid_argument("empty list: " + text);
    return vals;
}

std::string ratio_csv(const std::vector<flpsr::RatioEstimate>& est) {
    std::string csv = "n,mean_sw_mech,mean_sw_opt,ratio,ci_halfwidth,abs_error\n";
    for (const auto& e : est) {
        csv += std::to_string(e.n) + "," + fmt6(e.mean_sw_mech) + "," + fmt6(e.mean_sw_opt) + "," +
               fmt6(e.ratio) + "," + fmt6(e.ci_halfwidth) + "," + fmt6(e.abs_error) + "\n";
    }
    return csv;
}

struct CommonExperimentFlags {
    std::string dist;
    double capacity = 0.0, q1 = 0.0, q2 = 0.0;
    double percentile = -1.0, p1 = -1.0, p2 = -1.0;
    std::string n_list = "20..100:10";
    int reps = 10000;
    std::uint64_t seed = 0;
    bool paper_scale = false;
};

flpsr::ExperimentConfig make_config(const CommonExperimentFlags& f) {
    flpsr::ExperimentConfig cfg{load_distribution(f.dist), {}, {}, {}, f.reps, f.seed};
    if (f.capacity > 0.0) {
        if (f.percentile < 0.0) throw std::invalid_argument("--percentile is required for m=1");
        cfg.capacities = {f.capacity};
        cfg.percentiles = {f.percentile};
    } else if (f.q1 > 0.0 && f.q2 > 0.0) {
        if (f.p1 < 0.0 || f.p2 < 0.0) throw std::invalid_argument("--p1/--p2 are required for m=2");
        cfg.capacities = {f.q1, f.q2};
        cfg.percentiles = {f.p1, f.p2};
    } else {
        throw std::invalid_argument("specify either --capacity or both --q1 and --q2");
    }
    for (double n : parse_list(f.n_list)) cfg.n_values.push_back(static_cast<int>(n));
    if (f.paper_scale) cfg.replications = 10000;
    return cfg;
}

void add_experiment_flags(CLI::App* cmd, CommonExperimentFlags& f) {
    cmd->add_option("--dist", f.dist, "distribution spec (JSON file path or inline JSON)")
        ->required();
    cmd->add_option("--capacity", f.capacity, "facility capacity (m=1)")
        ->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--q1", f.q1, "left facility capacity (m=2)")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--q2", f.q2, "right facility capacity (m=2)")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--percentile", f.percentile, "mechanism percentile (m=1)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--p1", f.p1, "left percentile (m=2)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--p2", f.p2, "right percentile (m=2)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--n", f.n_list, "agent counts, e.g. 20..100:10 or 50,100,200");
    cmd->add_option("--reps", f.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_flag("--paper-scale", f.paper_scale, "use the full 10000 replications");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal percentile mechanisms for capacitated facility location on [0,1]"};
    app.require_subcommand(1);

    std::string out_path;
    std::string format;
    app.add_option("--out", out_path, "output path (default: stdout)");
    app.add_option("--format", format, "output format (json or csv; fixed per subcommand)");

    // optimize-one
    auto* opt1 = app.add_subcommand("optimize-one", "optimal one-facility percentile mechanism");
    std::string opt1_dist;
    double opt1_q = 0.5, opt1_tol = 1e-8;
    opt1->add_option("--dist", opt1_dist, "distribution spec")->required();
    opt1->add_option("--capacity", opt1_q, "facility capacity")->required()->check(CLI::Range(1e-9, 1.0));
    opt1->add_option("--tol", opt1_tol, "root-finding tolerance")->check(CLI::Range(1e-15, 1e-2));

    // optimize-two
    auto* opt2 = app.add_subcommand("optimize-two", "best ES two-facility percentile mechanism");
    std::string opt2_dist;
    double opt2_q1 = 0.2, opt2_q2 = 0.2, opt2_delta = 0.001;
    opt2->add_option("--dist", opt2_dist, "distribution spec")->required();
    opt2->add_option("--q1", opt2_q1, "first capacity")->required()->check(CLI::Range(1e-9, 1.0));
    opt2->add_option("--q2", opt2_q2, "second capacity")->required()->check(CLI::Range(1e-9, 1.0));
    opt2->add_option("--delta", opt2_delta, "search grid step")->check(CLI::Range(1e-6, 0.1));

    // feasible
    auto* feas = app.add_subcommand("feasible", "is an ES optimal percentile mechanism feasible?");
    std::string feas_dist;
    double feas_q1 = 0.2, feas_q2 = 0.2;
    feas->add_option("--dist", feas_dist, "distribution spec")->required();
    feas->add_option("--q1", feas_q1, "first capacity")->required()->check(CLI::Range(1e-9, 1.0));
    feas->add_option("--q2", feas_q2, "second capacity")->required()->check(CLI::Range(1e-9, 1.0));

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate serving intervals and limit welfare");
    std::string ev_dist;
    double ev_q = 0.0, ev_y = -1.0, ev_q1 = 0.0, ev_q2 = 0.0, ev_y1 = -1.0, ev_y2 = -1.0;
    ev->add_option("--dist", ev_dist, "distribution spec")->required();
    ev->add_option("--capacity", ev_q, "capacity (m=1)")->check(CLI::Range(1e-9, 1.0));
    ev->add_option("--y", ev_y, "facility position (m=1)")->check(CLI::Range(0.0, 1.0));
    ev->add_option("--q1", ev_q1, "left capacity (m=2)")->check(CLI::Range(1e-9, 1.0));
    ev->add_option("--q2", ev_q2, "right capacity (m=2)")->check(CLI::Range(1e-9, 1.0));
    ev->add_option("--y1", ev_y1, "left position (m=2)")->check(CLI::Range(0.0, 1.0));
    ev->add_option("--y2", ev_y2, "right position (m=2)")->check(CLI::Range(0.0, 1.0));

    // simulate / convergence
    auto* sim = app.add_subcommand("simulate", "Monte Carlo Bayesian approximation ratios");
    CommonExperimentFlags sim_flags;
    add_experiment_flags(sim, sim_flags);
    auto* conv = app.add_subcommand("convergence", "absolute error decay and log-log slope fit");
    CommonExperimentFlags conv_flags;
    add_experiment_flags(conv, conv_flags);

    // table
    auto* tab = app.add_subcommand("table", "optimal percentiles over a Beta parameter grid");
    std::string tab_family = "beta", tab_alphas = "2..6", tab_betas = "2..6";
    double tab_q = 0.0, tab_q1 = 0.0, tab_q2 = 0.0, tab_delta = 0.001, tab_tol = 1e-8;
    tab->add_option("--family", tab_family, "distribution family (beta)");
    tab->add_option("--alphas", tab_alphas, "alpha values, e.g. 2..6");
    tab->add_option("--betas", tab_betas, "beta values, e.g. 2..6");
    tab->add_option("--capacity", tab_q, "capacity (m=1 table)")->check(CLI::Range(1e-9, 1.0));
    tab->add_option("--q1", tab_q1, "first capacity (m=2 table)")->check(CLI::Range(1e-9, 1.0));
    tab->add_option("--q2", tab_q2, "second capacity (m=2 table)")->check(CLI::Range(1e-9, 1.0));
    tab->add_option("--delta", tab_delta, "search grid step (m=2)")->check(CLI::Range(1e-6, 0.1));
    tab->add_option("--tol", tab_tol, "root-finding tolerance (m=1)")->check(CLI::Range(1e-15, 1e-2));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        auto check_format = [&](const char* natural) {
            if (!format.empty() && format != natural) {
                throw std::invalid_argument(std::string("this subcommand emits ") + natural);
            }
        };

        if (opt1->parsed()) {
            check_format("json");
            const auto d = load_distribution(opt1_dist);
            const auto sol = flpsr::optimize_one(d, opt1_q, opt1_tol);
            json j;
            j["percentile"] = sol.percentile;
            j["position"] = sol.position;
            j["w_min"] = sol.w_min;
            j["limit_sw"] = sol.limit_sw;
            j["method"] = flpsr::to_string(sol.method);
            const auto flat = flpsr::flat_minimum_interval(d, opt1_q, sol.w_min);
            if (flat.second - flat.first > 1e-3) {
                j["flat_interval"] = {flat.first, flat.second};
                j["note"] = "welfare is flat on this interval; the leftmost minimizer is reported";
            }
            emit(out_path, j.dump(2) + "\n");
        } else if (opt2->parsed()) {
            check_format("json");
            const auto d = load_distribution(opt2_dist);
            const auto sol = flpsr::best_es_two(d, opt2_q1, opt2_q2, opt2_delta);
            json j;
            j["p1"] = sol.p1;
            j["p2"] = sol.p2;
            j["y1"] = sol.y1;
            j["y2"] = sol.y2;
            j["w_min"] = sol.w_min;
            j["limit_sw"] = sol.limit_sw;
            j["es_optimal_feasible"] = sol.es_optimal_feasible;
            j["orientation_swapped"] = sol.orientation_swapped;
            j["delta"] = sol.delta;
            emit(out_path, j.dump(2) + "\n");
        } else if (feas->parsed()) {
            check_format("json");
            const auto d = load_distribution(feas_dist);
            const auto res = flpsr::es_optimal_feasible(d, feas_q1, feas_q2);
            json j;
            j["feasible"] = res.feasible;
            if (res.witness) {
                j["witness"] = {res.witness->first, res.witness->second};
            } else {
                j["witness"] = nullptr;
            }
            j["reason"] = res.reason;
            emit(out_path, j.dump(2) + "\n");
        } else if (ev->parsed()) {
            check_format("json");
            const auto d = load_distribution(ev_dist);
            json j;
            if (ev_q > 0.0) {
                if (ev_y < 0.0) throw std::invalid_argument("eval m=1 requires --y");
                const auto w = flpsr::w_one(d, ev_q, ev_y);
                j["radius"] = w.ball.radius;
                j["left"] = w.ball.left;
                j["right"] = w.ball.right;
                j["regime"] = flpsr::to_string(w.ball.regime);
                j["w_value"] = w.w_value;
                j["limit_sw"] = w.limit_sw;
            } else if (ev_q1 > 0.0 && ev_q2 > 0.0) {
                if (ev_y1 < 0.0 || ev_y2 < 0.0 || ev_y1 > ev_y2) {
                    throw std::invalid_argument("eval m=2 requires --y1 <= --y2");
                }
                const auto w = flpsr::w_two(d, ev_q1, ev_q2, ev_y1, ev_y2);
                j["r1"] = w.serving.r1;
                j["r2"] = w.serving.r2;
                j["s1"] = {w.serving.s1_lo, w.serving.s1_hi};
                j["s2"] = {w.serving.s2_lo, w.serving.s2_hi};
                j["touching"] = w.serving.touching;
                j["w_value"] = w.w_value;
                j["limit_sw"] = w.limit_sw;
            } else {
                throw std::invalid_argument("eval requires --capacity/--y or --q1/--q2/--y1/--y2");
            }
            emit(out_path, j.dump(2) + "\n");
        } else if (sim->parsed()) {
            check_format("csv");
            const auto est = flpsr::estimate_ratio(make_config(sim_flags));
            emit(out_path, ratio_csv(est));
        } else if (conv->parsed()) {
            check_format("csv");
            const auto res = flpsr::convergence_curve(make_config(conv_flags));
            emit(out_path, ratio_csv(res.estimates) + "# loglog_slope=" + fmt6(res.loglog_slope) + "\n");
        } else if (tab->parsed()) {
            check_format("csv");
            if (tab_family != "beta") throw std::invalid_argument("only --family beta is supported");
            const auto alphas = parse_list(tab_alphas);
            const auto betas = parse_list(tab_betas);
            const bool two = tab_q1 > 0.0 && tab_q2 > 0.0;
            if (!two && !(tab_q > 0.0)) {
                throw std::invalid_argument("table requires --capacity or both --q1 and --q2");
            }
            std::string csv = "alpha\\beta";
            for (double b : betas) csv += "," + fmt6(b);
            csv += "\n";
            for (double a : alphas) {
                csv += fmt6(a);
                for (double b : betas) {
                    const auto d = flpsr::make_beta(a, b);
                    if (two) {
                        const auto sol = flpsr::best_es_two(d, tab_q1, tab_q2, tab_delta);
                        csv += ",\"(" + fmt6(sol.p1) + "," + fmt6(sol.p2) + ")" +
                               (sol.orientation_swapped ? "*" : "") + "\"";
                    } else {
                        csv += "," + fmt6(flpsr::optimize_one(d, tab_q, tab_tol).percentile);
                    }
                }
                csv += "\n";
            }
            emit(out_path, csv);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
