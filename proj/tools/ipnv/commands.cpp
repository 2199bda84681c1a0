#include "cli.hpp"

#include "ipnv/error.hpp"
#include "ipnv/exporters.hpp"
#include "ipnv/generator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <thread>

namespace ipnv::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::atomic<bool> g_interrupted{false};

void on_signal(int)
{
    g_interrupted = true;
}

void init_logging()
{
    static const bool once = [] {
        auto logger = spdlog::stderr_logger_mt("ipnv");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)once;
    const char* env = std::getenv("IPNV_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::vector<fs::path> bundle_paths(const fs::path& dir, const ScenarioConfig& config, bool with_plan = true)
{
    std::vector<fs::path> out;
    for (const auto& name : bundle_file_names(config)) {
        if (!with_plan && name == kContactPlanFile) {
            continue;
        }
        out.push_back(dir / name);
    }
    return out;
}

std::string window_line(const ContactWindow& w)
{
    return fmt::format("{} {} {} {}", w.source_id, w.destination_id, w.start.seconds, w.end.seconds);
}

GenerateOptions make_generate_options(const std::optional<double>& refine, bool light_time)
{
    if (refine && !(*refine > 0.0)) {
        throw ValidationError("--refine", "refinement tolerance must be positive");
    }
    GenerateOptions options;
    options.refine_tolerance = refine;
    options.light_time = light_time;
    return options;
}

std::map<std::string, std::string> flag_parameters(const std::optional<double>& refine, bool light_time)
{
    std::map<std::string, std::string> p;
    p["refine"] = refine ? fmt::format("{}", *refine) : "off";
    p["light_time"] = light_time ? "on" : "off";
    return p;
}

// --- subcommands ------------------------------------------------------------

struct GenerateArgs {
    fs::path definition;
    fs::path output;
    std::optional<double> refine;
    bool light_time = false;
};

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err)
{
    const auto t0 = Clock::now();
    const ScenarioDefinition def = [&] {
        try {
            return read_definition(read_file(args.definition));
        } catch (const ValidationError& e) {
            throw ValidationError(args.definition.filename().string(), e.what());
        }
    }();
    if (def.step >= def.end - def.start) {
        err << "warning: step exceeds the scenario span; tables hold only the start and end samples\n";
    }
    const ScenarioBundle bundle = generate_bundle(def, make_generate_options(args.refine, args.light_time));
    store_bundle(bundle, args.output);

    ManifestRecord record;
    record.command = "generate";
    record.parameters = flag_parameters(args.refine, args.light_time);
    record.inputs = {args.definition};
    record.outputs = bundle_paths(args.output, bundle.config);
    record.duration = Clock::now() - t0;
    write_run_manifest(args.output, record);

    const std::size_t steps = bundle.planet_tables.empty() ? 0 : bundle.planet_tables.begin()->second.size();
    fmt::print(out, "bodies: {} (1 star, {} planets)\n", 1 + bundle.config.planets.size(),
               bundle.config.planets.size());
    fmt::print(out, "nodes: {}\n", bundle.node_tables.size());
    fmt::print(out, "steps: {}\n", steps);
    fmt::print(out, "contacts: {}\n", bundle.contact_plan.size());
    fmt::print(out, "wrote {} files to {}\n", record.outputs.size(), args.output.string());
    return kExitOk;
}

struct ContactsArgs {
    fs::path bundle;
    std::optional<double> refine;
    bool light_time = false;
    bool diff = false;
};

int cmd_contacts(const ContactsArgs& args, std::ostream& out, std::ostream&)
{
    const auto t0 = Clock::now();
    const ScenarioBundle bundle = load_bundle(args.bundle, false);
    const ContactPlan plan = compute_plan(bundle, make_generate_options(args.refine, args.light_time));

    ManifestRecord record;
    record.command = args.diff ? "contacts --diff" : "contacts";
    record.parameters = flag_parameters(args.refine, args.light_time);
    record.inputs = bundle_paths(args.bundle, bundle.config, false);

    int status = kExitOk;
    if (args.diff) {
        const fs::path plan_path = args.bundle / std::string(kContactPlanFile);
        const ContactPlan existing = [&] {
            try {
                return read_contact_plan(read_file(plan_path));
            } catch (const ValidationError& e) {
                throw ValidationError(std::string(kContactPlanFile), e.what());
            }
        }();
        record.inputs.push_back(plan_path);

        const auto same = [](const ContactWindow& a, const ContactWindow& b) {
            return a.source_id == b.source_id && a.destination_id == b.destination_id && a.start == b.start &&
                   a.end == b.end;
        };
        std::size_t differences = 0;
        for (const auto& w : plan) {
            if (std::none_of(existing.begin(), existing.end(), [&](const auto& e) { return same(w, e); })) {
                fmt::print(out, "missing {}\n", window_line(w));
                ++differences;
            }
        }
        for (const auto& e : existing) {
            if (std::none_of(plan.begin(), plan.end(), [&](const auto& w) { return same(w, e); })) {
                fmt::print(out, "extra {}\n", window_line(e));
                ++differences;
            }
        }
        fmt::print(out, "{} differences\n", differences);
        status = differences == 0 ? kExitOk : kExitValidation;
    } else {
        store_contact_plan(plan, args.bundle);
        record.outputs = {args.bundle / std::string(kContactPlanFile)};
        fmt::print(out, "contacts: {}\n", plan.size());
    }
    record.duration = Clock::now() - t0;
    write_run_manifest(args.bundle, record);
    return status;
}

struct ExportArgs {
    fs::path bundle;
    std::string format;
    double rate = 1000.0;
    std::optional<double> epoch;
    bool no_ranges = false;
    std::vector<std::string> node_numbers;
    std::optional<fs::path> output;
};

std::map<std::string, std::uint64_t> parse_overrides(const std::vector<std::string>& entries)
{
    std::map<std::string, std::uint64_t> out;
    for (const auto& entry : entries) {
        const auto bad = [&] {
            return ValidationError("--node-number", "expected <node_id>=<number>, got \"" + entry + "\"");
        };
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
            throw bad();
        }
        std::uint64_t number = 0;
        const char* last = entry.data() + entry.size();
        if (std::from_chars(entry.data() + eq + 1, last, number).ptr != last) {
            throw bad();
        }
        if (!out.emplace(entry.substr(0, eq), number).second) {
            throw ValidationError("--node-number", "node \"" + entry.substr(0, eq) + "\" given twice");
        }
    }
    return out;
}

int cmd_export(const ExportArgs& args, std::ostream& out, std::ostream&)
{
    const auto t0 = Clock::now();
    const ScenarioBundle bundle = load_bundle(args.bundle);
    const NodeNumberMap map = build_node_map(bundle.config, parse_overrides(args.node_numbers));

    ExportOptions options;
    options.reference_epoch = args.epoch ? Epoch{*args.epoch} : bundle.config.start;
    options.data_rate = args.rate;
    options.emit_ranges = !args.no_ranges;
    const auto owlts = plan_owlts(bundle);

    const bool ion = args.format == "ion";
    const std::string text = ion ? export_ion(bundle.contact_plan, owlts, map, options)
                                 : export_hdtn(bundle.contact_plan, owlts, map, options);
    const fs::path target =
        args.output.value_or(args.bundle / (ion ? "contactPlan.ionrc" : "contactPlan.hdtn.json"));
    write_file_atomic(target, text);

    ManifestRecord record;
    record.command = "export";
    record.parameters = {{"format", args.format},
                         {"rate", fmt::format("{}", args.rate)},
                         {"epoch", fmt::format("{}", options.reference_epoch.seconds)},
                         {"ranges", options.emit_ranges ? "on" : "off"}};
    record.inputs = bundle_paths(args.bundle, bundle.config);
    record.outputs = {target};
    record.duration = Clock::now() - t0;
    write_run_manifest(args.bundle, record);

    fmt::print(out, "exported {} contacts to {}\n", bundle.contact_plan.size(), target.string());
    return kExitOk;
}

int cmd_validate(const fs::path& dir, std::ostream& out, std::ostream& err)
{
    const auto t0 = Clock::now();
    bool validation_failed = false;
    bool io_failed = false;
    const auto attempt = [&](const std::function<void()>& fn) {
        try {
            fn();
            return true;
        } catch (const ValidationError& e) {
            err << e.what() << "\n";
            validation_failed = true;
        } catch (const IoError& e) {
            err << e.what() << "\n";
            io_failed = true;
        }
        return false;
    };

    ScenarioBundle bundle;
    const std::string config_file(kConfigFile);
    const bool have_config = attempt([&] {
        try {
            bundle.config = read_config(read_file(dir / config_file));
        } catch (const ValidationError& e) {
            throw ValidationError(config_file, e.what());
        }
    });
    if (!have_config) {
        return validation_failed ? kExitValidation : kExitIo;
    }

    // First violated invariant per file, then the cross-file checks.
    const auto in_file = [&](const std::string& file, const std::function<void()>& fn) {
        return attempt([&] {
            try {
                fn();
            } catch (const ValidationError& e) {
                throw ValidationError(file, e.what());
            }
        });
    };
    bool files_ok = in_file(std::string(kContactPlanFile), [&] {
        bundle.contact_plan = read_contact_plan(read_file(dir / std::string(kContactPlanFile)));
        check_plan(bundle.contact_plan);
    });
    for (const auto& p : bundle.config.planets) {
        const auto file = planet_file_name(p.name);
        files_ok &= in_file(file, [&] {
            bundle.planet_tables.emplace(
                p.name, read_ephemeris(read_file(dir / file), EphemerisKind::planet, bundle.config.step));
        });
    }
    for (const auto& id : bundle.config.node_ids()) {
        const auto file = node_file_name(id);
        files_ok &= in_file(file, [&] {
            bundle.node_tables.emplace(id,
                                       read_ephemeris(read_file(dir / file), EphemerisKind::node, bundle.config.step));
        });
    }
    if (files_ok) {
        files_ok = attempt([&] { check_bundle(bundle); });
    }
    if (!files_ok) {
        return validation_failed ? kExitValidation : kExitIo;
    }

    ManifestRecord record;
    record.command = "validate";
    record.inputs = bundle_paths(dir, bundle.config);
    record.duration = Clock::now() - t0;
    write_run_manifest(dir, record);
    out << "OK\n";
    return kExitOk;
}

int cmd_stats(const fs::path& dir, std::ostream& out, std::ostream&)
{
    const auto t0 = Clock::now();
    const ScenarioBundle bundle = load_bundle(dir);
    const PlanStats stats = compute_stats(bundle);

    fmt::print(out, "windows: {}\n", stats.windows);
    for (const auto& [pair, s] : stats.per_pair) {
        fmt::print(out, "  {} -> {}: {} windows, {:.3f} s total\n", pair.first, pair.second, s.count,
                   s.total_duration);
    }
    fmt::print(out, "duration total/mean/max: {:.3f} / {:.3f} / {:.3f} s\n", stats.total_duration,
               stats.mean_duration, stats.max_duration);
    fmt::print(out, "midpoint owlt min/mean/max: {:.3f} / {:.3f} / {:.3f} s\n", stats.min_owlt, stats.mean_owlt,
               stats.max_owlt);
    fmt::print(out, "peak simultaneous windows: {}\n", stats.peak_simultaneous);

    ManifestRecord record;
    record.command = "stats";
    record.inputs = bundle_paths(dir, bundle.config);
    record.duration = Clock::now() - t0;
    write_run_manifest(dir, record);
    return kExitOk;
}

struct ServeArgs {
    fs::path bundle;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<fs::path> assets;
};

int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream&)
{
    const auto t0 = Clock::now();
    BundleServer server(args.bundle, args.assets);
    const int port = server.bind(args.host, args.port);

    const ScenarioBundle bundle = load_bundle(args.bundle);
    ManifestRecord record;
    record.command = "serve";
    record.parameters = {{"host", args.host}, {"port", std::to_string(port)}};
    record.inputs = bundle_paths(args.bundle, bundle.config);
    record.duration = Clock::now() - t0;
    write_run_manifest(args.bundle, record);

    g_interrupted = false;
    auto previous_int = std::signal(SIGINT, on_signal);
    auto previous_term = std::signal(SIGTERM, on_signal);
    std::jthread watcher([&server](std::stop_token stop) {
        while (!stop.stop_requested() && !g_interrupted) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        server.stop();
    });

    fmt::print(out, "serving {} on http://{}:{}/\n", args.bundle.string(), args.host, port);
    out.flush();
    server.listen();
    watcher.request_stop();
    watcher.join();
    std::signal(SIGINT, previous_int);
    std::signal(SIGTERM, previous_term);
    fmt::print(out, "server stopped\n");
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    init_logging();

    CLI::App app{"Generate, check, export and serve interplanetary DTN contact plans", "ipnv"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Propagate a scenario definition into a bundle directory");
    generate->add_option("definition", gen.definition, "Scenario definition JSON")->required();
    generate->add_option("output", gen.output, "Output bundle directory")->required();
    generate->add_option("--refine", gen.refine, "Refine window boundaries to this many seconds");
    generate->add_flag("--light-time", gen.light_time, "Trim windows so every transmitted bit arrives in time");

    ContactsArgs con;
    auto* contacts = app.add_subcommand("contacts", "Recompute contactPlan.json from the bundle's tables");
    contacts->add_option("bundle", con.bundle, "Bundle directory")->required();
    contacts->add_option("--refine", con.refine, "Refine window boundaries to this many seconds");
    contacts->add_flag("--light-time", con.light_time, "Apply the light-time filter");
    contacts->add_flag("--diff", con.diff, "Print differences against the existing plan instead of writing");

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export", "Export the contact plan as ION ionrc or HDTN JSON");
    export_cmd->add_option("bundle", exp.bundle, "Bundle directory")->required();
    export_cmd->add_option("--format", exp.format, "ion or hdtn")
        ->required()
        ->check(CLI::IsMember({"ion", "hdtn"}));
    export_cmd->add_option("--rate", exp.rate, "Data rate in bytes/s")->capture_default_str();
    export_cmd->add_option("--epoch", exp.epoch, "Reference epoch (default SimulationStartTime)");
    export_cmd->add_flag("--no-ranges", exp.no_ranges, "Omit `a range` lines from ION output");
    export_cmd->add_option("--node-number", exp.node_numbers, "Override a node number: <id>=<n>");
    export_cmd->add_option("-o,--output", exp.output, "Output file");

    fs::path validate_dir;
    auto* validate = app.add_subcommand("validate", "Check a bundle directory");
    validate->add_option("bundle", validate_dir, "Bundle directory")->required();

    fs::path stats_dir;
    auto* stats = app.add_subcommand("stats", "Summarize a bundle's contact plan");
    stats->add_option("bundle", stats_dir, "Bundle directory")->required();

    ServeArgs srv;
    auto* serve = app.add_subcommand("serve", "Serve a bundle over HTTP for the viewer");
    serve->add_option("bundle", srv.bundle, "Bundle directory")->required();
    serve->add_option("--host", srv.host, "Listen address")->capture_default_str();
    serve->add_option("--port", srv.port, "Listen port")->capture_default_str();
    serve->add_option("--assets", srv.assets, "Built viewer assets, served under /viewer/");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();
    }
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitValidation;
    }

    try {
        if (generate->parsed()) {
            return cmd_generate(gen, out, err);
        }
        if (contacts->parsed()) {
            return cmd_contacts(con, out, err);
        }
        if (export_cmd->parsed()) {
            return cmd_export(exp, out, err);
        }
        if (validate->parsed()) {
            return cmd_validate(validate_dir, out, err);
        }
        if (stats->parsed()) {
            return cmd_stats(stats_dir, out, err);
        }
        if (serve->parsed()) {
            return cmd_serve(srv, out, err);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}

} // namespace ipnv::cli
