// nemo-roam: run network-mobility scenarios and report path stretch,
// encapsulation overhead and signaling cost of basic support vs route
// optimization.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nemo/errors.hpp"
#include "nemo/report.hpp"
#include "nemo/scenario.hpp"
#include "nemo/simulation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpecError = 2;   // parse / validation failure
constexpr int kExitRuntimeError = 3;

fs::path scenario_dir() {
    if (const char* env = std::getenv("NEMO_ROAM_SCENARIOS")) return fs::path(env);
#ifdef NEMO_ROAM_SCENARIO_DIR
    return fs::path(NEMO_ROAM_SCENARIO_DIR);
#else
    return fs::path("scenarios");
#endif
}

// A scenario argument is either a file path or the name of a shipped scenario.
fs::path resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return fs::path(arg);
    fs::path shipped = scenario_dir() / (arg + ".scn");
    if (fs::exists(shipped)) return shipped;
    shipped = scenario_dir() / arg;
    if (fs::exists(shipped)) return shipped;
    throw nemo::ValidationError("no such scenario file or shipped scenario: " + arg);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nemo::ValidationError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_command(const std::string& scenario_arg, const std::string& mode_override,
                const std::string& trace_path, const std::string& report_format,
                std::int64_t t_end_override) {
    nemo::ScenarioSpec spec;
    try {
        spec = nemo::parse_scenario(read_file(resolve_scenario(scenario_arg)));
        if (mode_override == "bs") spec.mode = nemo::RunMode::Bs;
        if (mode_override == "ro") spec.mode = nemo::RunMode::Ro;
        if (t_end_override >= 0) spec.t_end_ms = t_end_override;
        nemo::validate_scenario(spec);  // overrides may invalidate (ro + nesting)
    } catch (const nemo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSpecError;
    }

    nemo::RunResult result;
    try {
        result = nemo::run_scenario(spec);
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntimeError;
    }

    if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << trace_path << '\n';
            return kExitRuntimeError;
        }
        out << result.trace_text;
    }

    nemo::ReportFormat format = nemo::ReportFormat::Table;
    if (report_format == "json") format = nemo::ReportFormat::Json;
    if (report_format == "csv") format = nemo::ReportFormat::Csv;
    std::cout << nemo::emit_report(result.report, format);
    return kExitOk;
}

int validate_command(const std::string& scenario_arg) {
    try {
        nemo::parse_scenario(read_file(resolve_scenario(scenario_arg)));
    } catch (const nemo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSpecError;
    }
    std::cout << "ok\n";
    return kExitOk;
}

int list_command() {
    fs::path dir = scenario_dir();
    if (!fs::is_directory(dir)) {
        std::cerr << "error: scenario directory " << dir << " not found\n";
        return kExitSpecError;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".scn") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string description;
        std::ifstream in(f);
        std::string line;
        if (std::getline(in, line) && line.rfind("# ", 0) == 0) description = line.substr(2);
        std::cout << f.stem().string();
        if (!description.empty()) std::cout << "  -  " << description;
        std::cout << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic NEMO basic-support / route-optimization simulator"};
    app.require_subcommand(1);

    std::string scenario_arg, mode_override, trace_path, report_format = "table";
    std::int64_t t_end_override = -1;

    CLI::App* run = app.add_subcommand("run", "run a scenario and print the metrics report");
    run->add_option("scenario", scenario_arg, "scenario file or shipped scenario name")
        ->required();
    run->add_option("--mode", mode_override, "override the scenario's mode")
        ->check(CLI::IsMember({"bs", "ro"}));
    run->add_option("--trace", trace_path, "write the per-hop trace to this file");
    run->add_option("--report", report_format, "report format")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    run->add_option("--t-end", t_end_override, "override the scenario's tend (ms)");

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario file");
    validate->add_option("scenario", scenario_arg, "scenario file or shipped scenario name")
        ->required();

    app.add_subcommand("list-scenarios", "list shipped scenarios");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return run_command(scenario_arg, mode_override, trace_path, report_format,
                           t_end_override);
    if (validate->parsed()) return validate_command(scenario_arg);
    return list_command();
}
