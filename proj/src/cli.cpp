#include "redsharc/cli.hpp"

#include "redsharc/eigenfaces.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace redsharc {

int exitCodeFor(control::Outcome o) noexcept
{
    switch (o) {
    case control::Outcome::COMPLETED: return kExitCompleted;
    case control::Outcome::DEADLOCK: return kExitDeadlock;
    case control::Outcome::ERROR: return kExitError;
    }
    return kExitError;
}

namespace {

std::string readFile(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, std::string("cannot read ") + what + " '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr const char* kSchemaHelp = R"(Input files are JSON.
  config: {"cores":[{"id":0,"kind":"processor","dmaChannels":4,"maxResident":4},
                    {"id":1,"kind":"fabric_slot","area":100,"streamPorts":4,"blockPorts":4}],
           "memory":{"onChipWords":16384,"offChipWords":1048576},
           "defaults":{"streamDepth":16}, "ssnStreamSlots":64, "interleaving":true,
           "costModel":{"reconfig":1000, ...}}
  dfg:    {"kernels":[{"id":1,"impl":"SRC","inputs":0,"outputs":1}, ...],
           "edges":[{"kind":"stream","from":[1,0],"to":[2,0]}, ...],
           "outputs":[{"kernel":1,"port":0,"kind":"stream","type":"U32","length":8}, ...]}
  static placement: {"placement":[{"kernel":1,"core":0}, ...]}
Built-in kernel implementations for --dfg: SRC SINK RELAY HWSRC HWSINK HWRELAY.
)";

struct RunArgs {
    std::string config;
    std::string dfg;
    std::string app;
    std::string policy = "fifo";
    std::string mode = "analysis";
    std::string trace;
    bool interactive = false;
    std::string dataset;
    std::uint64_t seed = 1;
};

control::SchedulingPolicy makePolicy(const std::string& spec)
{
    if (spec == "fifo") {
        return control::policyFifo();
    }
    if (spec.rfind("static:", 0) == 0) {
        return control::policyStatic(control::parseStaticPlacement(readFile(spec.substr(7), "placement")));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown policy '" + spec + "' (use fifo or static:<file>)");
}

void printDiagnostics(const std::vector<std::string>& diags, std::ostream& os)
{
    for (const auto& d : diags) {
        os << "  " << d << '\n';
    }
}

void printReport(const control::RunReport& r, std::ostream& out)
{
    out << "outcome: " << control::outcomeName(r.outcome);
    if (r.errorCode) {
        out << " (" << errorCodeName(*r.errorCode) << ")";
    }
    out << '\n';
    printDiagnostics(r.diagnostics, out);
    out << "streams: " << r.streamsCreated << " created, " << r.streamsFreed << " freed; blocks: "
        << r.blocksAllocated << " allocated, " << r.blocksFreed << " freed\n";
    if (!r.counters.allZero()) {
        out << "time: " << r.counters.time;
        for (std::size_t k = 0; k < perfmon::kEventKindCount; ++k) {
            if (r.counters.totals[k] != 0) {
                out << ' ' << perfmon::eventKindName(static_cast<perfmon::EventKind>(k)) << '=' << r.counters.totals[k];
            }
        }
        out << '\n';
    }
}

void printOutputs(const control::RunReport& r, std::ostream& out)
{
    for (const auto& [port, elems] : r.outputs) {
        out << "output " << port.kernel.value << ':' << port.port << " [" << elems.size() << "]";
        for (const auto& e : elems) {
            out << ' ' << formatPayload(e);
        }
        out << '\n';
    }
}

int runCommand(const RunArgs& a, std::istream& in, std::ostream& out, std::ostream& err)
{
    control::RunOptions opt;
    if (a.mode == "analysis") {
        opt.mode = RunMode::ANALYSIS;
    } else if (a.mode == "release") {
        opt.mode = RunMode::RELEASE;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown mode '" + a.mode + "' (use analysis or release)");
    }
    if (a.dfg.empty() == a.app.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --dfg or --app");
    }
    if (!a.app.empty() && a.app != "eigenfaces") {
        throw Error(ErrorCode::InvalidArgument, "unknown application '" + a.app + "'");
    }
    if (a.config.empty() && a.app.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--config is required with --dfg");
    }
    auto cfg = a.config.empty() ? eigenfaces::defaultEigenfacesConfig() : sysio::loadConfig(a.config);
    auto policy = makePolicy(a.policy);

    kernelapi::KernelRegistry registry;
    dfg::Dfg graph;
    std::optional<eigenfaces::EigenfacesApp> app;
    if (!a.app.empty()) {
        auto data = a.dataset.empty() ? eigenfaces::generateSyntheticDataset(a.seed, 10, 3, 16, 16, 20)
                                      : eigenfaces::loadDataset(a.dataset);
        app = eigenfaces::buildEigenfacesDfg(data, registry);
        graph = app->graph;
    } else {
        kernelapi::registerStandardKernels(registry);
        graph = dfg::parseDfg(readFile(a.dfg, "dfg"));
    }

    sysio::System sys(cfg);
    control::ControlKernel ck(sys, graph, registry, policy, opt);
    ck.start();
    control::RunReport report;
    if (a.interactive) {
        ck.pauseAll();
        report = runInteractive(ck, sys, in, out);
    } else {
        report = ck.run();
    }

    printReport(report, out);
    if (app && report.outcome == control::Outcome::COMPLETED) {
        auto results = eigenfaces::pipelineResults(report, *app);
        for (std::size_t s = 0; s < results.size(); ++s) {
            out << "sample " << s << ": subject " << results[s].subject << " (reference " << results[s].reference
                << ") distance " << results[s].distance << '\n';
        }
    } else if (!app) {
        printOutputs(report, out);
    }
    if (!a.trace.empty()) {
        const bool csv = a.trace.size() >= 4 && a.trace.compare(a.trace.size() - 4, 4, ".csv") == 0;
        perfmon::exportTrace(a.trace, report.trace, csv ? perfmon::TraceFormat::CSV : perfmon::TraceFormat::JSONL);
        if (opt.mode == RunMode::RELEASE) {
            err << "note: release mode records no trace events\n";
        }
    }
    return exitCodeFor(report.outcome);
}

int validateCommand(const std::string& configPath, const std::string& dfgPath, std::ostream& out)
{
    auto cfg = sysio::loadConfig(configPath);
    auto graph = dfg::parseDfg(readFile(dfgPath, "dfg"));
    kernelapi::KernelRegistry registry;
    kernelapi::registerStandardKernels(registry);
    auto diags = kernelapi::validateDfg(graph, registry);
    if (!diags.empty()) {
        out << "invalid: " << diags.size() << " problem(s)\n";
        for (const auto& d : diags) {
            out << "  " << dfg::diagCodeName(d.code) << ": " << d.message << '\n';
        }
        return kExitError;
    }
    sysio::System sys(cfg);
    control::ControlKernel ck(sys, graph, registry, control::policyFifo());
    ck.start();
    out << "valid: " << graph.nodes().size() << " kernels on " << cfg.cores.size() << " cores\n";
    return kExitCompleted;
}

} // namespace

control::RunReport runInteractive(control::ControlKernel& ck, const sysio::System& sys, std::istream& in,
                                  std::ostream& out)
{
    control::RunReport report;
    std::jthread engine([&] { report = ck.run(); });

    auto finishRun = [&] {
        if (ck.paused()) {
            ck.resume();
        }
    };
    out << "console: engine paused; type 'resume', 'step', 'status' or 'continue-to-completion'\n";
    std::string line;
    bool quit = false;
    while (true) {
        if (!std::getline(in, line)) {
            break; // end of input continues the run to completion
        }
        std::istringstream words(line);
        std::string cmd;
        words >> cmd;
        if (cmd.empty()) {
            continue;
        }
        try {
            if (cmd == "pause") {
                ck.pauseAll();
                out << "paused\n";
            } else if (cmd == "resume") {
                ck.resume();
                out << "resumed\n";
            } else if (cmd == "step") {
                std::size_t n = 1;
                if (!(words >> n)) {
                    n = 1;
                }
                ck.advancePaused(n);
                out << "stepped " << n << '\n';
            } else if (cmd == "status") {
                out << ck.debugStatus();
            } else if (cmd == "peek") {
                std::string what;
                std::uint32_t id = 0;
                if (!(words >> what >> id) || what != "stream") {
                    throw Error(ErrorCode::InvalidArgument, "usage: peek stream <id>");
                }
                auto elems = ck.debugPeekStream(StreamId{id});
                out << "stream " << id << " [" << elems.size() << "]";
                for (const auto& e : elems) {
                    out << ' ' << formatPayload(e);
                }
                out << '\n';
            } else if (cmd == "read" || cmd == "write") {
                std::string what;
                std::uint32_t id = 0;
                std::size_t idx = 0;
                if (!(words >> what >> id >> idx) || what != "block") {
                    throw Error(ErrorCode::InvalidArgument, "usage: " + cmd + " block <id> <idx>" +
                                                                (cmd == "write" ? " <value>" : ""));
                }
                if (cmd == "read") {
                    const auto value = formatPayload(ck.debugReadBlock(BlockId{id}, idx));
                    out << "block " << id << '[' << idx << "] = " << value << '\n';
                } else {
                    std::string value;
                    if (!(words >> value)) {
                        throw Error(ErrorCode::InvalidArgument, "usage: write block <id> <idx> <value>");
                    }
                    const auto type = sys.bsn().descriptor(BlockId{id}).elemType;
                    ck.debugWriteBlock(BlockId{id}, idx, parsePayload(type, value));
                    out << "ok\n";
                }
            } else if (cmd == "continue-to-completion") {
                break;
            } else if (cmd == "quit") {
                quit = true;
                break;
            } else {
                out << "unknown command '" << cmd
                    << "' (pause, resume, step [n], status, peek stream <id>, read block <id> <idx>, "
                       "write block <id> <idx> <value>, continue-to-completion, quit)\n";
            }
        } catch (const Error& e) {
            out << "error: " << e.what() << '\n';
        }
    }
    if (quit) {
        ck.abort();
    }
    finishRun();
    engine.join();
    return report;
}

int cliMain(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App cli{"Dataflow runtime simulator for heterogeneous stream/block systems", "redsharc"};
    cli.footer(kSchemaHelp);
    cli.require_subcommand(1);

    RunArgs ra;
    auto* run = cli.add_subcommand("run", "Run a dataflow graph on a configured system");
    run->add_option("--config", ra.config, "System configuration (JSON)");
    run->add_option("--dfg", ra.dfg, "Dataflow graph (JSON)");
    run->add_option("--app", ra.app, "Built-in application (eigenfaces)");
    run->add_option("--policy", ra.policy, "fifo or static:<placement.json>")->capture_default_str();
    run->add_option("--mode", ra.mode, "analysis or release")->capture_default_str();
    run->add_option("--trace", ra.trace, "Write the event trace (.jsonl, or .csv)");
    run->add_flag("--interactive", ra.interactive, "Start paused with the debug console on stdin");
    run->add_option("--dataset", ra.dataset, "Eigenfaces dataset (JSON)");
    run->add_option("--seed", ra.seed, "Seed for the synthetic eigenfaces dataset")->capture_default_str();

    std::string vConfig;
    std::string vDfg;
    auto* validate = cli.add_subcommand("validate", "Check a graph against a configuration");
    validate->add_option("--config", vConfig, "System configuration (JSON)")->required();
    validate->add_option("--dfg", vDfg, "Dataflow graph (JSON)")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e, out, err);
        return code == 0 ? kExitCompleted : kExitError;
    }

    try {
        if (run->parsed()) {
            return runCommand(ra, in, out, err);
        }
        return validateCommand(vConfig, vDfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ParseError ||
            e.code() == ErrorCode::SemanticError) {
            err << kSchemaHelp;
        }
        return kExitError;
    }
}

} // namespace redsharc
