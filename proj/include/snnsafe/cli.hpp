#pragma once

// Command-line front end. Every subcommand reads `--config <file>` of
// `key = value` lines; flags given on the command line take precedence.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snnsafe/snnsafe.hpp"

namespace snnsafe::cli {

enum ExitCode : int {
    kOk = 0,
    kUnsafe = 1,
    kUnknown = 2,
    kUsage = 64,
    kDataError = 65,
    kIoError = 74,
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Reads `key = value` lines; '#' and ';' start comments, [sections] are ignored.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::istringstream in(io::read_file(path));
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find_first_of("#;");
        line = trim(line.substr(0, hash));
        if (line.empty() || line.front() == '[')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(n) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        while (!key.empty() && key.front() == '-')
            key.erase(0, 1);
        out.emplace_back(key, value);
    }
    return out;
}

/// Appends config entries to the argument list, skipping keys already
/// present as flags.
inline std::vector<std::string> expand_config(std::vector<std::string> args)
{
    std::string path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (path.empty() || kept.empty())
        return kept;
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        bool present = false;
        for (const auto& a : kept)
            present = present || a == flag || a.rfind(flag + "=", 0) == 0;
        if (present)
            continue;
        if (value == "true") {
            extra.push_back(flag);
        } else if (value != "false") {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    kept.insert(kept.end(), extra.begin(), extra.end());
    return kept;
}

/// Network flags shared by subcommands that take an SNN; a ReLU file is
/// converted with --theta and --leak on load.
struct NetworkArgs {
    std::string path;
    double theta = 1.0;
    double leak = 1.0;
    bool ignore_biases = false;

    void add(CLI::App* app, const char* flag = "--snn")
    {
        app->add_option(flag, path, "network file (srla, or relu to convert)")->required();
        app->add_option("--theta", theta, "threshold used when converting a relu file");
        app->add_option("--leak", leak, "leak used when converting a relu file");
        app->add_flag("--ignore-biases", ignore_biases, "zero every bias before use");
    }

    SpikingNetwork load() const
    {
        const std::string text = io::read_file(path);
        SpikingNetwork snn = io::file_activation(text) == Activation::ReLU
                                 ? convert::ann_to_snn(io::parse_network(text), theta, leak)
                                 : io::parse_spiking_network(text);
        return ignore_biases ? convert::without_biases(std::move(snn)) : snn;
    }
};

struct SolverArgs {
    double budget = 3600.0;
    bool single = false;
    bool global_big_m = false;
    double epsilon = 1e-6;

    void add(CLI::App* app)
    {
        app->add_option("--budget", budget, "seconds per solver call");
        app->add_flag("--single", single, "one query per output instead of a disjunction");
        app->add_flag("--global-big-m", global_big_m, "one big-M constant for every neuron");
        app->add_option("--epsilon", epsilon, "strictness constant of the floor encoding");
    }

    verify::VerifyOptions options(unsigned jobs) const
    {
        if (!(budget >= 0.0))
            throw InvalidConfig("budget must be non-negative");
        verify::VerifyOptions opt;
        opt.budget = verify::Budget(budget);
        opt.disjunctive = !single;
        opt.encoding.global_big_m = global_big_m;
        opt.encoding.epsilon = epsilon;
        opt.jobs = jobs;
        return opt;
    }
};

inline std::string join(const Vector& v, const char* sep = ", ")
{
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out += (i ? sep : "") + sim::fmt("%.6g", v(i));
    return out;
}

inline std::string describe(const Verdict& v)
{
    std::string out = to_string(v.kind);
    if (!v.counterexample)
        return out;
    const auto& c = *v.counterexample;
    out += " (" + std::string(to_string(v.provenance)) + "): output " + std::to_string(c.output_index) + " " +
           (c.side == BoundSide::Upper ? ">= upper" : "<= lower") + " bound " + io::format_double(c.bound) +
           "\n  input: " + join(c.input) + "\n  outputs: " + join(c.outputs);
    return out;
}

inline int verdict_code(const Verdict& v)
{
    switch (v.kind) {
    case VerdictKind::Safe: return kOk;
    case VerdictKind::Unsafe: return kUnsafe;
    case VerdictKind::Unknown: return kUnknown;
    }
    return kUnknown;
}

inline std::string tighten_log_csv(const std::vector<tighten::TightenStep>& log)
{
    std::string out = "output,side,phase,bound,verdict,seconds\n";
    for (const auto& s : log)
        out += std::to_string(s.output) + "," + to_string(s.side) + "," + s.phase + "," + io::format_double(s.bound) +
               "," + s.outcome + "," + sim::fmt("%.6f", s.seconds) + "\n";
    return out;
}

} // namespace detail

/// Parses and dispatches; returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Verification and NUMSTEPS selection for SRLA spiking controllers", "snnsafe"};
    app.require_subcommand(1);
    unsigned jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for simulation loops")->check(CLI::PositiveNumber);
    const auto add_config = [](CLI::App* sub) {
        sub->add_option("--config", "key = value overrides (flags win)");
    };
    const auto sub = [&](const char* name, const char* help) {
        CLI::App* s = app.add_subcommand(name, help);
        add_config(s);
        return s;
    };

    // convert
    auto* c_convert = sub("convert", "ANN to SRLA SNN, optionally report T_up");
    std::string ann_path, out_path;
    double theta = 1.0, leak = 1.0, period = 0.0, step_time = 0.0;
    c_convert->add_option("--ann", ann_path, "relu network file")->required();
    c_convert->add_option("--theta", theta, "neuron threshold");
    c_convert->add_option("--leak", leak, "leak factor in [0, 1]");
    c_convert->add_option("--out", out_path, "SNN output file (stdout if absent)");
    c_convert->add_option("--period", period, "control period in seconds");
    c_convert->add_option("--step-time", step_time, "execution time of one step in seconds");

    // simulate / trace
    auto* c_sim = sub("simulate", "run the SNN on one input and print the table");
    auto* c_trace = sub("trace", "dump every neuron's S, P, A per timestep");
    detail::NetworkArgs net;
    std::string input_text;
    std::size_t steps = 1;
    for (auto* s : {c_sim, c_trace}) {
        net.add(s);
        s->add_option("--input", input_text, "comma-separated input vector")->required();
        s->add_option("--steps", steps, "number of timesteps")->required();
    }

    // mse
    auto* c_mse = sub("mse", "per-output mean squared error between ANN and SNN");
    std::string box_path, range_path, snn_path;
    std::size_t samples = 5000;
    std::uint64_t seed = 0;
    c_mse->add_option("--ann", ann_path)->required();
    c_mse->add_option("--snn", snn_path, "SNN file (converted from --ann if absent)");
    c_mse->add_option("--theta", theta);
    c_mse->add_option("--leak", leak);
    c_mse->add_option("--box", box_path)->required();
    c_mse->add_option("--steps", steps)->required();
    c_mse->add_option("--samples", samples);
    c_mse->add_option("--seed", seed);

    // encode
    auto* c_encode = sub("encode", "write the MILP encoding in LP format");
    detail::SolverArgs solver;
    std::string query = "none";
    std::size_t output_index = 0;
    net.add(c_encode);
    c_encode->add_option("--steps", steps)->required();
    c_encode->add_option("--box", box_path)->required();
    c_encode->add_option("--range", range_path, "needed with --query");
    c_encode->add_option("--query", query, "none, ub, lb or both")->check(CLI::IsMember({"none", "ub", "lb", "both"}));
    c_encode->add_option("--output", output_index, "output index with --single");
    c_encode->add_flag("--single", solver.single);
    c_encode->add_flag("--global-big-m", solver.global_big_m);
    c_encode->add_option("--epsilon", solver.epsilon);
    c_encode->add_option("--out,--export-lp", out_path, "LP file (stdout if absent)");

    // solve
    auto* c_solve = sub("solve", "solve an LP-format model, or validate a solution for it");
    std::string lp_path, solution_out, check_path;
    double budget = 3600.0;
    c_solve->add_option("--lp", lp_path)->required();
    c_solve->add_option("--budget", budget);
    c_solve->add_option("--solution", solution_out, "write the assignment here");
    c_solve->add_option("--check", check_path, "validate this solution file instead of solving");

    // verify
    auto* c_verify = sub("verify", "simulation then formal check of the safe range");
    std::size_t sim_samples = 500;
    std::string cex_path;
    net.add(c_verify);
    solver.add(c_verify);
    c_verify->add_option("--steps", steps)->required();
    c_verify->add_option("--box", box_path)->required();
    c_verify->add_option("--range", range_path)->required();
    c_verify->add_option("--sim-samples", sim_samples);
    c_verify->add_option("--seed", seed);
    c_verify->add_option("--cex", cex_path, "write a counterexample input here");

    // tighten
    auto* c_tighten = sub("tighten", "tighten the violated sides of the safe range");
    std::size_t k_steps = 5;
    double beta = 0.01, delta = 0.001;
    std::string log_path, plot_path;
    net.add(c_tighten);
    solver.add(c_tighten);
    c_tighten->add_option("--steps", steps)->required();
    c_tighten->add_option("--box", box_path)->required();
    c_tighten->add_option("--range", range_path)->required();
    c_tighten->add_option("--K", k_steps);
    c_tighten->add_option("--beta", beta);
    c_tighten->add_option("--delta", delta);
    c_tighten->add_option("--seed", seed);
    c_tighten->add_option("--sim-samples", sim_samples, "probe dataset size");
    c_tighten->add_option("--out", out_path, "tightened range file");
    c_tighten->add_option("--log", log_path, "per-iteration log (CSV)");
    c_tighten->add_option("--plot-data", plot_path);

    // search
    auto* c_search = sub("search", "find the smallest NUMSTEPS meeting MSE and safe range");
    double eps = 0.0, margin = 0.0;
    std::size_t t_up = 0, mse_samples = 5000;
    std::string report_path;
    detail::SolverArgs search_solver;
    c_search->add_option("--ann", ann_path)->required();
    c_search->add_option("--snn", snn_path, "SNN file (converted from --ann if absent)");
    c_search->add_option("--theta", theta);
    c_search->add_option("--leak", leak);
    c_search->add_option("--box", box_path)->required();
    c_search->add_option("--range", range_path)->required();
    c_search->add_option("--eps", eps)->required();
    c_search->add_option("--t-up", t_up);
    c_search->add_option("--period", period);
    c_search->add_option("--step-time", step_time);
    c_search->add_option("--margin", margin);
    c_search->add_option("--seed", seed);
    c_search->add_option("--mse-samples", mse_samples);
    c_search->add_option("--sim-samples", sim_samples);
    c_search->add_option("--K", k_steps);
    c_search->add_option("--beta", beta);
    c_search->add_option("--delta", delta);
    search_solver.add(c_search);
    c_search->add_option("--report", report_path, "per-T report (CSV)");
    c_search->add_option("--plot-data", plot_path, "given vs tightened bounds per T (CSV)");

    try {
        args = detail::expand_config(std::move(args));
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kUsage;
    }

    const auto emit = [&](const std::string& path, const std::string& text) {
        if (path.empty() || path == "-")
            out << text;
        else
            io::write_file(path, text);
    };

    try {
        if (c_convert->parsed()) {
            if (period > 0.0 || step_time > 0.0)
                out << "T_up = " << convert::compute_t_up(period, step_time) << "\n";
            emit(out_path, io::serialize(convert::ann_to_snn(io::load_network(ann_path), theta, leak)));
            return kOk;
        }
        if (c_sim->parsed() || c_trace->parsed()) {
            const SpikingNetwork snn = net.load();
            const SimulationTrace trace = sim::snn_run(snn, io::parse_vector(input_text), steps);
            if (c_trace->parsed()) {
                out << sim::dump_trace(trace);
                return kOk;
            }
            out << sim::format_table(trace, snn);
            for (std::size_t k = 0; k < snn.output_count(); ++k) {
                out << "op" << k << ":";
                for (std::size_t t = 1; t <= trace.length(); ++t)
                    out << (t > 1 ? ", " : " ") << sim::fmt("%.6g", trace.running_average[t - 1](static_cast<Eigen::Index>(k)));
                out << "\n";
            }
            return kOk;
        }
        if (c_mse->parsed()) {
            const LayeredNetwork ann = io::load_network(ann_path);
            const SpikingNetwork snn =
                snn_path.empty() ? convert::ann_to_snn(ann, theta, leak) : io::load_spiking_network(snn_path);
            const InputBox box = io::load_box(box_path, ann.input_count());
            out << "mse: " << detail::join(sim::mse(sim::sample_inputs(box, samples, seed), ann, snn, steps, jobs))
                << "\n";
            return kOk;
        }
        if (c_encode->parsed()) {
            const SpikingNetwork snn = net.load();
            const InputBox box = io::load_box(box_path, snn.input_count());
            const auto enc = encode::encode_snn(snn, steps, box, solver.options(jobs).encoding);
            milp::MilpModel model = enc.model;
            if (query != "none") {
                if (range_path.empty())
                    throw InvalidConfig("--query needs --range");
                const RangeSpec range = io::load_ranges(range_path, snn.output_count());
                const auto mode =
                    solver.single ? encode::QueryMode::single(output_index) : encode::QueryMode::disjunctive();
                std::vector<double> b;
                for (const auto& iv : range.bounds)
                    b.push_back(query == "ub" ? iv.upper : iv.lower);
                if (query == "both")
                    model = encode::encode_range_query(enc, range);
                else
                    model = query == "ub" ? encode::encode_ub_query(enc, b, mode) : encode::encode_lb_query(enc, b, mode);
            }
            emit(out_path, milp::write_lp(model));
            if (!out_path.empty() && out_path != "-")
                out << "variables " << model.variable_count() << ", constraints " << model.constraint_count()
                    << ", integral " << model.integral_count() << "\n";
            return kOk;
        }
        if (c_solve->parsed()) {
            const milp::MilpModel model = milp::read_lp(lp_path);
            milp::SolveResult res;
            if (!check_path.empty()) {
                res = milp::import_solution(model, check_path);
            } else {
                if (!(budget >= 0.0))
                    throw InvalidConfig("budget must be non-negative");
                res = milp::solve(model, std::chrono::duration<double>(budget));
                if (!solution_out.empty())
                    io::write_file(solution_out, milp::write_solution(model, res));
            }
            out << "status: " << milp::to_string(res.status) << "\n";
            if (res.objective_value)
                out << "objective: " << io::format_double(*res.objective_value) << "\n";
            if (!res.message.empty())
                out << res.message << "\n";
            switch (res.status) {
            case milp::SolveStatus::Feasible: return kOk;
            case milp::SolveStatus::Infeasible: return kUnsafe;
            default: return kUnknown;
            }
        }
        if (c_verify->parsed()) {
            const SpikingNetwork snn = net.load();
            const InputBox box = io::load_box(box_path, snn.input_count());
            const RangeSpec range = io::load_ranges(range_path, snn.output_count());
            auto opt = solver.options(jobs);
            opt.sim_samples = sim_samples;
            opt.seed = seed;
            const Verdict v = verify::verify(snn, steps, box, range, opt);
            out << detail::describe(v) << "\n";
            if (v.counterexample && !cex_path.empty())
                io::write_file(cex_path, io::format_vector(v.counterexample->input, ",") + "\n");
            return detail::verdict_code(v);
        }
        if (c_tighten->parsed()) {
            const SpikingNetwork snn = net.load();
            const InputBox box = io::load_box(box_path, snn.input_count());
            const RangeSpec range = io::load_ranges(range_path, snn.output_count());
            tighten::TightenConfig cfg;
            cfg.K = k_steps;
            cfg.beta = beta;
            cfg.delta = delta;
            cfg.seed = seed;
            cfg.verify = solver.options(jobs);
            if (sim_samples > 0)
                cfg.probe = sim::sample_inputs(box, sim_samples, seed + 1);
            const auto t = tighten::snn_bounds(snn, steps, box, range, cfg);
            out << io::serialize(t.range);
            if (!out_path.empty())
                io::write_file(out_path, io::serialize(t.range));
            if (!log_path.empty())
                io::write_file(log_path, detail::tighten_log_csv(t.log()));
            if (!plot_path.empty())
                io::write_file(plot_path, search::plot_data_csv(t, range, steps));
            for (std::size_t i = 0; i < range.size(); ++i)
                for (const auto* s : {&t.lower[i], &t.upper[i]})
                    if (s->result && s->result->status != tighten::TightenStatus::Tight)
                        err << "output " << i << " " << to_string(s == &t.lower[i] ? BoundSide::Lower : BoundSide::Upper)
                            << ": " << to_string(s->result->status) << "\n";
            return t.verified() ? kOk : kUnknown;
        }
        if (c_search->parsed()) {
            const LayeredNetwork ann = io::load_network(ann_path);
            const SpikingNetwork snn =
                snn_path.empty() ? convert::ann_to_snn(ann, theta, leak) : io::load_spiking_network(snn_path);
            const InputBox box = io::load_box(box_path, snn.input_count());
            const RangeSpec range = io::load_ranges(range_path, snn.output_count());
            if (t_up == 0) {
                if (!(period > 0.0 && step_time > 0.0))
                    throw InvalidConfig("give --t-up, or --period and --step-time");
                t_up = convert::compute_t_up(period, step_time);
            }
            search::SearchConfig cfg;
            cfg.margin = margin;
            cfg.seed = seed;
            cfg.mse_samples = mse_samples;
            cfg.verify_samples = sim_samples;
            cfg.verify = search_solver.options(jobs);
            cfg.tighten.K = k_steps;
            cfg.tighten.beta = beta;
            cfg.tighten.delta = delta;
            cfg.tighten.seed = seed;
            const auto report = search::find_numsteps(ann, snn, eps, box, range, t_up, cfg);
            out << search::report_csv(report) << report.summary() << "\n";
            if (!report_path.empty())
                search::write_report(report, report_path);
            if (!plot_path.empty())
                search::emit_plot_data(report, plot_path);
            return report.outcome == search::Outcome::NotFound ? kUnsafe : kOk;
        }
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}

inline int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args));
}

} // namespace snnsafe::cli
