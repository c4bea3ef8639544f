// Command-line driver: runs the pipeline stages of one scenario and writes
// report.json, per-section CSV tables and field grids.
//
// Exit codes: 0 all applicable checks pass, 2 a check failed, 3 pipeline error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mshenv/mshenv.hpp"

namespace fs = std::filesystem;
using namespace mshenv;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 2;
constexpr int kExitPipeline = 3;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> grid;
    std::optional<double> tol;
    bool csv = false;
};

class StageTimer {
public:
    explicit StageTimer(std::string name) : name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        std::fprintf(stderr, "[time] %-10s %8.2f s\n", name_.c_str(), s);
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

ScenarioConfig load(const Options& o) {
    auto cfg = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
    if (o.grid) cfg.N = *o.grid;
    if (o.tol) cfg.solver_tol = *o.tol;
    if (o.out) cfg.out_dir = *o.out;
    if (cfg.out_dir.empty()) cfg.out_dir = "out";
    cfg.validate();
    return cfg;
}

std::string csv_cell(const json& v) {
    if (v.is_null()) return "nan";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : " ") + csv_cell(e);
        return s;
    }
    return v.dump();
}

// Every report section with a row table becomes <section>.csv.
void write_tables(const json& data, const fs::path& dir) {
    for (const auto& [section, body] : data.items()) {
        if (!body.is_object() || !body.contains("table") || !body["table"].is_array() || body["table"].empty()) continue;
        const auto& rows = body["table"];
        std::ofstream os(dir / (section + ".csv"));
        if (!os) throw Error("io", "cannot write table " + section);
        std::vector<std::string> cols;
        for (const auto& [k, _] : rows.front().items()) cols.push_back(k);
        for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << csv_cell(r.value(cols[c], json()));
            os << '\n';
        }
    }
}

void write_field(const ScalarField& f, const fs::path& dir, const std::string& name, bool csv) {
    write_field_binary(f, (dir / ("field_" + name + ".bin")).string());
    if (csv) write_field_csv(f, (dir / ("field_" + name + ".csv")).string());
}

void print_gates(const json& data) {
    for (const auto& [name, ok] : data["gates"].items())
        std::printf("%-18s %s\n", name.c_str(), ok.get<bool>() ? "PASS" : "FAIL");
}

int finish(ScenarioRun& run, const Options& o, const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
    json g = json::object();
    for (const auto& [name, ok] : run.report.gates) g[name] = ok;
    run.report.data["config"] = run.cfg.to_json();
    run.report.data["gates"] = g;
    run.report.data["pass"] = run.report.pass();

    const fs::path dir(run.cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "report.json") << run.report.data.dump(2) << '\n';
    write_tables(run.report.data, dir);
    for (const auto& [name, f] : fields) write_field(*f, dir, name, o.csv);

    print_gates(run.report.data);
    std::printf("report: %s\n", (dir / "report.json").c_str());
    return run.report.pass() ? kExitPass : kExitCheckFailed;
}

int cmd_check_weight(const Options& o) {
    ScenarioRun run;
    run.cfg = load(o);
    {
        StageTimer t("weight");
        stage_weight(run);
    }
    return finish(run, o, {{"psi", &run.w.psi}, {"theta", &run.theta}});
}

int cmd_build_barrier(const Options& o, bool sub) {
    ScenarioRun run;
    run.cfg = load(o);
    {
        StageTimer t("weight");
        stage_weight(run);
    }
    {
        StageTimer t("barriers");
        stage_barriers(run);
    }
    // Only the requested barrier gates the exit code; the weight checks are informational here.
    const std::string keep = sub ? "subsolution" : "supersolution";
    std::erase_if(run.report.gates, [&](const auto& g) { return g.first != keep; });
    return finish(run, o, {{sub ? "sub" : "super", sub ? &run.sub->field : &run.super->field}});
}

int cmd_solve(const Options& o) {
    ScenarioRun run;
    run.cfg = load(o);
    {
        StageTimer t("weight");
        stage_weight(run);
    }
    {
        StageTimer t("envelope");
        stage_envelope(run);
    }
    std::erase_if(run.report.gates, [](const auto& g) { return g.first != "stabilized"; });
    return finish(run, o, {{"u", &run.env->limit.u}});
}

int cmd_verify(const Options& o) {
    ScenarioRun run;
    run.cfg = load(o);
    {
        StageTimer t("weight");
        stage_weight(run);
    }
    {
        StageTimer t("barriers");
        stage_barriers(run);
    }
    {
        StageTimer t("envelope");
        stage_envelope(run);
    }
    {
        StageTimer t("verify");
        stage_verify(run);
    }
    return finish(run, o,
                  {{"u", &run.env->limit.u},
                   {"psi", &run.w.psi},
                   {"theta", &run.theta},
                   {"sub", &run.sub->field},
                   {"super", &run.super->field}});
}

// Re-reads a report written by an earlier run, prints its gates and
// regenerates the CSV tables.
int cmd_report(const Options& o, const std::string& path) {
    const fs::path in = path.empty() ? fs::path(o.out.value_or("out")) / "report.json" : fs::path(path);
    std::ifstream is(in);
    if (!is) throw Error("io", "cannot read " + in.string());
    const json data = json::parse(is);
    if (!data.contains("gates")) throw Error("io", in.string() + " has no gates section");
    print_gates(data);
    write_tables(data, in.parent_path().empty() ? fs::path(".") : in.parent_path());
    return data.value("pass", false) ? kExitPass : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted m-subharmonic envelope pipeline"};
    app.require_subcommand(1);
    Options o;
    std::string report_path;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Scenario .ini file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory (default: output.dir from the config, else out)");
        sub->add_option("--grid", o.grid, "Nodes per axis (overrides the config)");
        sub->add_option("--tol", o.tol, "Solver tolerance (overrides the config)");
        sub->add_flag("--csv", o.csv, "Also write fields as CSV");
    };
    std::vector<std::pair<CLI::App*, std::function<int()>>> cmds;
    auto add = [&](const char* name, const char* help, std::function<int()> f) {
        auto* sub = app.add_subcommand(name, help);
        common(sub);
        cmds.emplace_back(sub, std::move(f));
        return sub;
    };
    add("check-weight", "Build the weight and run the hypothesis checkers", [&] { return cmd_check_weight(o); });
    add("build-sub", "Build the subsolution barrier", [&] { return cmd_build_barrier(o, true); });
    add("build-super", "Build the supersolution barrier", [&] { return cmd_build_barrier(o, false); });
    add("solve", "Solve for the C-stabilized envelope", [&] { return cmd_solve(o); });
    add("verify", "Run the full pipeline and verify the conclusions", [&] { return cmd_verify(o); });
    add("report", "Summarize an existing report.json", [&] { return cmd_report(o, report_path); })
        ->add_option("--report", report_path, "Path to report.json (default OUT/report.json)");

    CLI11_PARSE(app, argc, argv);
    try {
        for (const auto& [sub, f] : cmds)
            if (sub->parsed()) return f();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitPipeline;
    }
    return kExitPipeline;
}
