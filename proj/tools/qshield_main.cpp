// qshield: compile QDDC shield specifications into runtime enforcement
// shields and analyze them (expected non-deviation, worst-case burst
// deviation latency).

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qshield/analysis.hpp"
#include "qshield/errors.hpp"
#include "qshield/shield.hpp"

namespace fs = std::filesystem;
using namespace qshield;

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_unrealizable = 2;
constexpr int k_exit_spec_error = 3;
constexpr int k_exit_capacity = 4;

struct CommonFlags {
    std::string out_dir;
    std::optional<unsigned> horizon;
    bool no_dm = false;
    std::optional<std::string> order;
    std::optional<std::size_t> max_states;
    bool use_float = false;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory (created if needed)");
        cmd->add_option("--horizon", horizon, "override the spec's optimization horizon");
        cmd->add_flag("--no-dm", no_dm, "disable deviation minimization");
        cmd->add_option("--order", order, "override the output preference order");
        cmd->add_option("--max-states", max_states, "state bound for automaton constructions");
        cmd->add_flag("--float", use_float, "double-precision arithmetic instead of rationals");
        cmd->add_option("--seed", seed, "random seed for simulation");
    }

    SynthOptions synth_options() const {
        SynthOptions o;
        if (max_states) o.compile.max_states = *max_states;
        o.exact = !use_float;
        return o;
    }
    AnalysisOptions analysis_options() const {
        AnalysisOptions o;
        if (max_states) o.compile.max_states = *max_states;
        o.exact = !use_float;
        return o;
    }

    ShieldSpec load(const std::string& path) const {
        ShieldSpec spec = load_shield_spec(path);
        if (horizon) spec.horizon = *horizon;
        if (no_dm) spec.dm = false;
        if (order) spec.ord = OutputOrder::parse(*order, spec.iface.shield_outputs);
        return spec;
    }
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

fs::path ensure_out_dir(const CommonFlags& flags) {
    fs::path dir = flags.out_dir.empty() ? fs::path(".") : fs::path(flags.out_dir);
    fs::create_directories(dir);
    return dir;
}

// Named formula from a spec file: req, hdc, or a 0-ary macro compiled over
// all declared variables.
std::pair<Dfa, VarSet> compile_named(const ShieldSpec& spec, const std::string& name,
                                     const CompileOptions& opts) {
    if (name == "req") {
        VarSet vars = spec.iface.game_inputs();
        if (spec.req_import) return {*spec.req_import, vars};
        if (!spec.req) throw declaration_error("spec has no req: formula");
        return {compile(*spec.req, vars, opts), vars};
    }
    if (name == "hdc") {
        VarSet vars({k_sse_ok_name, k_deviation_name});
        return {compile(hdc_formula(spec.type), vars, opts), vars};
    }
    VarSet vars = spec.iface.ambient();
    QddcFormula f = parse_qddc(name, vars, spec.macros);
    return {compile(f, vars, opts), vars};
}

QddcFormula non_deviation_formula() {
    // true ^ <!Deviation>
    return QddcFormula::chop(
        QddcFormula::truth(),
        QddcFormula::point(PropFormula::negate(PropFormula::var(k_deviation_name))));
}

QddcFormula burst_deviation_formula() {
    // [[SSEOK && Deviation]]
    return QddcFormula::all(PropFormula::conj(PropFormula::var(k_sse_ok_name),
                                              PropFormula::var(k_deviation_name)));
}

int cmd_compile(const CommonFlags& flags, const std::string& spec_path,
                const std::string& formula) {
    ShieldSpec spec = flags.load(spec_path);
    auto [dfa, vars] = compile_named(spec, formula, flags.synth_options().compile);
    fs::path dir = ensure_out_dir(flags);
    std::string base = formula == "req" || formula == "hdc" ? formula : "formula";
    write_file(dir / (base + ".dfa"), export_dfa_text(dfa));
    write_file(dir / (base + ".dot"), export_dot(dfa, base));
    std::cout << "vars: " << vars.to_string() << "\n";
    std::cout << "states: " << dfa.num_states() << "\n";
    std::cout << "accepting: " << dfa.num_accepting() << "\n";
    std::cout << "wrote " << (dir / (base + ".dfa")).string() << ", "
              << (dir / (base + ".dot")).string() << "\n";
    return k_exit_ok;
}

int report_unrealizable(const Unrealizable& u) {
    std::cerr << "unrealizable: the hard requirement admits no non-blocking supervisor\n";
    std::cerr << "losing region: " << u.losing_region.size()
              << " accepting state(s) excluded by the safety fixpoint\n";
    return k_exit_unrealizable;
}

int cmd_synth(const CommonFlags& flags, const std::string& spec_path) {
    ShieldSpec spec = flags.load(spec_path);
    auto result = synthesize(spec, flags.synth_options());
    if (std::holds_alternative<Unrealizable>(result))
        return report_unrealizable(std::get<Unrealizable>(result));
    const ShieldResult& r = std::get<ShieldResult>(result);

    fs::path dir = ensure_out_dir(flags);
    write_file(dir / "controller.table", export_controller_table(r.controller));
    write_file(dir / "controller.dot", export_dot(r.controller.sup.dfa, "controller"));
    Dfa req_io = spec.req_import
                     ? *spec.req_import
                     : compile(*spec.req, spec.iface.game_inputs(), flags.synth_options().compile);
    write_file(dir / "req_io.dfa", export_dfa_text(req_io));

    std::ostringstream stats;
    stats << "shield_type = " << spec.type.to_string() << "\n";
    stats << "dm = " << (spec.dm ? "on" : "off") << "\n";
    if (spec.dm) stats << "horizon = " << spec.horizon << "\n";
    stats << "order = " << spec.ord->to_string() << "\n";
    stats << "hshield_states = " << r.stats.hshield_states << "\n";
    stats << "mps_states = " << r.stats.mps_states << "\n";
    if (spec.dm) stats << "mphos_states = " << r.stats.mphos_states << "\n";
    stats << "controller_states = " << r.stats.controller_states << "\n";
    stats << "controller_live_states = " << r.stats.controller_live_states << "\n";
    stats << "shield_states = " << r.stats.cascade_states << "\n";
    stats << "synthesis_seconds = " << std::fixed << std::setprecision(3) << r.stats.seconds
          << "\n";
    write_file(dir / "stats.txt", stats.str());
    std::cout << stats.str();
    std::cout << "wrote " << (dir / "controller.table").string() << "\n";
    return k_exit_ok;
}

int cmd_analyze(const CommonFlags& flags, const std::string& spec_path, bool with_mrmc) {
    ShieldSpec spec = flags.load(spec_path);
    auto result = synthesize(spec, flags.synth_options());
    if (std::holds_alternative<Unrealizable>(result))
        return report_unrealizable(std::get<Unrealizable>(result));
    const ShieldResult& r = std::get<ShieldResult>(result);
    AnalysisOptions aopts = flags.analysis_options();

    Dtmc chain = build_dtmc(r.controller, spec, non_deviation_formula(), aopts);
    std::string expected;
    if (aopts.exact) {
        Rational e = expected_value(chain);
        expected = decimal_string(e, 7);
    } else {
        std::ostringstream tmp;
        tmp << std::fixed << std::setprecision(7) << expected_value_float(chain);
        expected = tmp.str();
    }
    LatencyResult lat = maxlen(r.controller, spec, burst_deviation_formula(), aopts);

    std::ostringstream report;
    report << "shield_type = " << spec.type.to_string() << "\n";
    report << "dm = " << (spec.dm ? "on" : "off") << "\n";
    if (spec.dm) report << "horizon = " << spec.horizon << "\n";
    report << "controller_states = " << r.stats.controller_states << "\n";
    report << "controller_live_states = " << r.stats.controller_live_states << "\n";
    report << "shield_states = " << r.stats.cascade_states << "\n";
    report << "synthesis_seconds = " << std::fixed << std::setprecision(3) << r.stats.seconds
           << "\n";
    report << "dtmc_states = " << chain.num_states() << "\n";
    report << "expected_value = " << expected << "\n";
    report << "maxlen = " << lat.to_string() << "\n";
    report << "latency = " << latency_cycles(lat).to_string() << "\n";
    std::cout << report.str();

    if (!flags.out_dir.empty() || with_mrmc) {
        fs::path dir = ensure_out_dir(flags);
        write_file(dir / "report.kv", report.str());
        if (with_mrmc) {
            write_file(dir / "chain.tra", export_mrmc_tra(chain));
            write_file(dir / "chain.lab", export_mrmc_lab(chain));
        }
    }
    return k_exit_ok;
}

int cmd_simulate(const CommonFlags& flags, const std::string& spec_path, std::uint64_t steps) {
    ShieldSpec spec = flags.load(spec_path);
    auto result = synthesize(spec, flags.synth_options());
    if (std::holds_alternative<Unrealizable>(result))
        return report_unrealizable(std::get<Unrealizable>(result));
    const ShieldResult& r = std::get<ShieldResult>(result);
    SimStats stats = simulate(r.controller, spec, steps, flags.seed, false,
                              flags.analysis_options());
    std::cout << "steps = " << stats.steps << "\n";
    std::cout << "seed = " << flags.seed << "\n";
    std::cout << "deviations = " << stats.deviations << "\n";
    std::cout << std::fixed << std::setprecision(7);
    std::cout << "deviation_freq = " << stats.deviation_freq << "\n";
    std::cout << "non_deviation_freq = " << stats.non_deviation_freq << "\n";
    std::cout << "sse_ok_freq = " << stats.sse_ok_freq << "\n";
    return k_exit_ok;
}

int cmd_export_mrmc(const CommonFlags& flags, const std::string& spec_path, bool validate) {
    ShieldSpec spec = flags.load(spec_path);
    auto result = synthesize(spec, flags.synth_options());
    if (std::holds_alternative<Unrealizable>(result))
        return report_unrealizable(std::get<Unrealizable>(result));
    const ShieldResult& r = std::get<ShieldResult>(result);
    Dtmc chain = build_dtmc(r.controller, spec, non_deviation_formula(),
                            flags.analysis_options());
    fs::path dir = ensure_out_dir(flags);
    write_file(dir / "chain.tra", export_mrmc_tra(chain));
    write_file(dir / "chain.lab", export_mrmc_lab(chain));
    std::cout << "states = " << chain.num_states() << "\n";
    std::cout << "transitions = " << chain.num_transitions() << "\n";
    if (validate) {
        chain.check_stochastic();
        std::cout << "validated: every row sums to 1\n";
    }
    std::cout << "wrote " << (dir / "chain.tra").string() << ", "
              << (dir / "chain.lab").string() << "\n";
    return k_exit_ok;
}

int cmd_run(const CommonFlags& flags, const std::string& spec_path, const std::string& formula,
            const std::string& trace_path) {
    ShieldSpec spec = flags.load(spec_path);
    auto [dfa, vars] = compile_named(spec, formula, flags.synth_options().compile);

    std::ifstream file;
    std::istream* in = &std::cin;
    if (!trace_path.empty() && trace_path != "-") {
        file.open(trace_path);
        if (!file) throw std::runtime_error("cannot open trace file " + trace_path);
        in = &file;
    }
    std::cout << "vars: " << vars.to_string() << "\n";
    State s = dfa.init();
    std::string line;
    std::size_t pos = 0;
    while (std::getline(*in, line)) {
        auto letter = parse_bit_line(line, vars);
        if (!letter) continue;
        s = dfa.next(s, *letter);
        std::cout << pos++ << ' ' << (dfa.accepting(s) ? 1 : 0) << "\n";
    }
    return k_exit_ok;
}

int cmd_exec(const std::string& table_path, const std::string& monitor_path) {
    std::ifstream tin(table_path);
    if (!tin) throw std::runtime_error("cannot open controller table " + table_path);
    ControllerTable table = ControllerTable::parse(tin);
    std::optional<Dfa> monitor;
    if (!monitor_path.empty()) {
        std::ifstream min(monitor_path);
        if (!min) throw std::runtime_error("cannot open monitor " + monitor_path);
        monitor = import_dfa_text(min);
    }
    ShieldInstance inst(std::move(table), std::move(monitor));
    std::string line;
    while (std::getline(std::cin, line)) {
        auto letter = parse_bit_line(line, inst.table().inputs);
        if (!letter) continue;
        StepResult r = inst.step(*letter);
        std::cout << format_step_line(r, inst.table().outputs) << "\n";
    }
    std::cerr << "steps=" << inst.steps() << " deviations=" << inst.deviations() << "\n";
    return k_exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QDDC shield synthesis and analysis"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string spec_path, formula_name, trace_path, table_path, monitor_path;
    std::uint64_t steps = 1000000;
    bool with_mrmc = false, validate = false;

    auto* compile_cmd = app.add_subcommand("compile", "compile a named formula to a DFA");
    compile_cmd->add_option("spec", spec_path, "shield spec file")->required();
    compile_cmd->add_option("--formula", formula_name, "req, hdc, or a macro expression")
        ->required();
    flags.attach(compile_cmd);

    auto* synth_cmd = app.add_subcommand("synth", "synthesize the shield controller");
    synth_cmd->add_option("spec", spec_path, "shield spec file")->required();
    flags.attach(synth_cmd);

    auto* analyze_cmd =
        app.add_subcommand("analyze", "expected non-deviation and burst latency");
    analyze_cmd->add_option("spec", spec_path, "shield spec file")->required();
    analyze_cmd->add_flag("--mrmc", with_mrmc, "also write the chain in MRMC format");
    flags.attach(analyze_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "drive the shield with random inputs");
    sim_cmd->add_option("spec", spec_path, "shield spec file")->required();
    sim_cmd->add_option("--steps", steps, "number of steps");
    flags.attach(sim_cmd);

    auto* mrmc_cmd = app.add_subcommand("export-mrmc", "write the analysis chain for MRMC");
    mrmc_cmd->add_option("spec", spec_path, "shield spec file")->required();
    mrmc_cmd->add_flag("--validate", validate, "check that the rows sum to one");
    flags.attach(mrmc_cmd);

    auto* run_cmd = app.add_subcommand("run", "feed a trace through a formula monitor");
    run_cmd->add_option("spec", spec_path, "shield spec file")->required();
    run_cmd->add_option("--formula", formula_name, "req, hdc, or a macro expression")
        ->required();
    run_cmd->add_option("--trace", trace_path, "bit lines file ('-' for stdin)");
    flags.attach(run_cmd);

    auto* exec_cmd =
        app.add_subcommand("exec", "run a controller table on stdin bit lines");
    exec_cmd->add_option("--table", table_path, "controller table file")->required();
    exec_cmd->add_option("--monitor", monitor_path, "requirement monitor .dfa for the ok flag");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compile_cmd->parsed()) return cmd_compile(flags, spec_path, formula_name);
        if (synth_cmd->parsed()) return cmd_synth(flags, spec_path);
        if (analyze_cmd->parsed()) return cmd_analyze(flags, spec_path, with_mrmc);
        if (sim_cmd->parsed()) return cmd_simulate(flags, spec_path, steps);
        if (mrmc_cmd->parsed()) return cmd_export_mrmc(flags, spec_path, validate);
        if (run_cmd->parsed()) return cmd_run(flags, spec_path, formula_name, trace_path);
        if (exec_cmd->parsed()) return cmd_exec(table_path, monitor_path);
    } catch (const parse_error& e) {
        std::cerr << "spec error: " << e.what();
        if (e.line() >= 0) std::cerr << " (line " << e.line() << ", column " << e.col() << ")";
        std::cerr << "\n";
        return k_exit_spec_error;
    } catch (const declaration_error& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return k_exit_spec_error;
    } catch (const not_prefix_closed& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return k_exit_spec_error;
    } catch (const capacity_error& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return k_exit_capacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return k_exit_ok;
}
