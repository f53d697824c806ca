#include "mashup/cli.hpp"

#include "mashup/typecheck.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <unistd.h>

namespace mashup {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int exit_code_for(Stage s)
{
    switch (s) {
    case Stage::Parse: return ExitParse;
    case Stage::Composition: return ExitComposition;
    case Stage::Type:
    case Stage::Conformance: return ExitType;
    }
    return ExitParse;
}

struct Target {
    EntryPoint entry;
    std::vector<ObjRef> receivers;
};

Target resolve_target(const CliConfig& cfg, const Language& lang, const ModelInstance& model)
{
    std::optional<EntryPoint> entry;
    if (cfg.entry) {
        entry = parse_entry(*cfg.entry);
        if (!entry)
            throw Fault(FaultKind::NoSuchMethod, "malformed --entry '" + *cfg.entry + "', expected Class.op");
    } else {
        entry = lang.manifest.main;
    }
    if (!entry)
        throw Fault(FaultKind::NoSuchMethod, "no entry point: the manifest has no 'main' and --entry was not given");
    const WovenClass* wc = lang.woven.find(entry->class_name);
    if (!wc)
        throw Fault(FaultKind::UnknownClass, "entry class '" + entry->class_name + "' is not part of the language");
    if (!wc->resolve(entry->op_name))
        throw Fault(FaultKind::NoSuchMethod, "entry class " + entry->class_name + " has no operation '" + entry->op_name + "'");
    Target t{*entry, {}};
    for (ObjRef r : model.roots())
        if (model.class_of(r).is_kind_of(entry->class_name))
            t.receivers.push_back(r);
    if (t.receivers.empty())
        throw Fault(FaultKind::NoSuchMethod, "the model has no root object of class " + entry->class_name
                                                 + " to run " + entry->class_name + "." + entry->op_name + " on");
    return t;
}

void print_diagnostics(const DiagnosticError& e, std::ostream& err, bool color)
{
    for (const auto& d : e.diagnostics())
        err << d.str(color) << "\n";
}

int report_fault(const Fault& f, std::ostream& err)
{
    err << "error: " << to_string(f.kind()) << ": " << f.what() << "\n";
    return f.is_contract_violation() ? ExitContract : ExitRuntime;
}

int cmd_compose(const Language& lang, std::ostream& out)
{
    out << "composed " << lang.woven.package_name << ": " << lang.woven.class_order.size() << " classes from "
        << lang.units.size() << " units\n";
    return ExitOk;
}

int cmd_emit(const CliConfig& cfg, const Language& lang, std::ostream& out, std::ostream& err)
{
    std::string text = emit_report(lang.woven).render();
    if (!cfg.output) {
        out << text;
        return ExitOk;
    }
    std::ofstream f(*cfg.output, std::ios::binary);
    if (!f || !(f << text)) {
        err << "error: cannot write " << cfg.output->string() << "\n";
        return ExitParse;
    }
    return ExitOk;
}

int cmd_check(const ModelInstance& model, std::ostream& out)
{
    int failures = 0;
    for (const auto& r : check_model(model)) {
        if (r.status == CheckResult::Status::Violated) {
            out << "VIOLATED " << r.invariant << " @ " << r.object_id << "\n";
            ++failures;
        } else if (r.status == CheckResult::Status::Error) {
            out << "ERROR " << r.invariant << " @ " << r.object_id << ": " << r.message << "\n";
            ++failures;
        }
    }
    return failures ? ExitContract : ExitOk;
}

RuntimeOptions runtime_options(const CliConfig& cfg, ContractPolicy fallback)
{
    RuntimeOptions o;
    o.policy = cfg.policy.value_or(fallback);
    o.tiebreak = cfg.tiebreak;
    return o;
}

int cmd_run(const CliConfig& cfg, const Language& lang, ModelInstance& model, std::ostream& out, std::ostream& err)
{
    Target t = resolve_target(cfg, lang, model);
    Interpreter interp(model, runtime_options(cfg, ContractPolicy::PrePostOnly));
    try {
        for (ObjRef r : t.receivers)
            interp.invoke(r, t.entry.op_name);
    } catch (const Fault& f) {
        out << interp.trace().str();
        return report_fault(f, err);
    }
    out << interp.trace().str();
    return ExitOk;
}

int cmd_bench(const CliConfig& cfg, const Language& lang, const ModelInstance& model, std::ostream& out)
{
    Target t = resolve_target(cfg, lang, model);
    RuntimeOptions opts = runtime_options(cfg, ContractPolicy::PrePostOnly);
    std::vector<double> ms;
    ms.reserve(cfg.repetitions);
    std::size_t nodes = 0;
    for (int i = 0; i < cfg.repetitions; ++i) {
        ModelInstance copy = model;
        Interpreter interp(copy, opts);
        auto start = std::chrono::steady_clock::now();
        for (ObjRef r : t.receivers)
            interp.invoke(r, t.entry.op_name);
        auto stop = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        nodes = interp.trace().node_labels().size();
    }
    double sum = 0;
    for (double v : ms)
        sum += v;
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << "bench " << t.entry.class_name << "." << t.entry.op_name << "\n";
    os << "elements " << model.size() << "\n";
    os << "node_executions " << nodes << "\n";
    os << "reps " << cfg.repetitions << "\n";
    os << "mean_ms " << sum / ms.size() << "\n";
    os << "min_ms " << *std::min_element(ms.begin(), ms.end()) << "\n";
    os << "max_ms " << *std::max_element(ms.begin(), ms.end()) << "\n";
    out << os.str();
    return ExitOk;
}

} // namespace

std::optional<EntryPoint> parse_entry(const std::string& text)
{
    auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size() || text.find('.', dot + 1) != std::string::npos)
        return std::nullopt;
    return EntryPoint{text.substr(0, dot), text.substr(dot + 1)};
}

std::unique_ptr<Language> load_language(const std::filesystem::path& manifest)
{
    auto text = read_file(manifest);
    if (!text)
        throw DiagnosticError(Stage::Parse, {Diagnostic{manifest.string(), {}, "UnitNotFound",
                                                        "cannot read manifest '" + manifest.string() + "'"}});
    auto lang = std::make_unique<Language>();
    lang->manifest = parse_manifest(*text, manifest.filename().string());
    FileUnitLoader loader(manifest.parent_path().empty() ? std::filesystem::path(".") : manifest.parent_path());
    lang->units = resolve_requires(lang->manifest, loader);
    lang->woven = compose(lang->units, lang->manifest.package_name);
    auto diags = typecheck_units(lang->units, lang->woven);
    if (!diags.empty())
        throw DiagnosticError(Stage::Type, std::move(diags));
    return lang;
}

ModelInstance load_model_file(const std::filesystem::path& path, const Language& lang)
{
    auto text = read_file(path);
    if (!text)
        throw DiagnosticError(Stage::Parse, {Diagnostic{path.string(), {}, "UnitNotFound",
                                                        "cannot read model '" + path.string() + "'"}});
    return load_model(*text, lang.woven, path.filename().string());
}

int run_cli(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    static const char* commands[] = {"compose", "check", "run", "emit", "bench"};
    if (std::find(std::begin(commands), std::end(commands), cfg.command) == std::end(commands)) {
        err << "error: unknown command '" << cfg.command << "'\n";
        return ExitParse;
    }
    bool needs_model = cfg.command == "check" || cfg.command == "run" || cfg.command == "bench";
    if (needs_model && cfg.model.empty()) {
        err << "error: '" << cfg.command << "' needs --model\n";
        return ExitParse;
    }
    if (cfg.repetitions < 1) {
        err << "error: --reps must be at least 1\n";
        return ExitParse;
    }
    try {
        auto lang = load_language(cfg.manifest);
        if (cfg.command == "compose")
            return cmd_compose(*lang, out);
        if (cfg.command == "emit")
            return cmd_emit(cfg, *lang, out, err);
        ModelInstance model = load_model_file(cfg.model, *lang);
        if (cfg.command == "check")
            return cmd_check(model, out);
        if (cfg.command == "run")
            return cmd_run(cfg, *lang, model, out, err);
        return cmd_bench(cfg, *lang, model, out);
    } catch (const DiagnosticError& e) {
        print_diagnostics(e, err, cfg.color);
        return exit_code_for(e.stage());
    } catch (const Fault& f) {
        return report_fault(f, err);
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Compose, check and run DSLs built from metamodel, contract and action units", "mashup"};
    app.require_subcommand(1, 1);
    CliConfig cfg;
    std::string contracts, tiebreak = "asc";

    auto common = [&](CLI::App* sub, bool with_model) {
        sub->add_option("--manifest", cfg.manifest, ".mashup manifest")->required();
        if (with_model) {
            sub->add_option("--model", cfg.model, "JSON model file")->required();
            sub->add_option("--entry", cfg.entry, "entry operation, Class.op (default: manifest main)");
            sub->add_option("--contracts", contracts, "off | prepost | full")
                ->check(CLI::IsMember({"off", "prepost", "full"}));
            sub->add_option("--tiebreak", tiebreak, "scheduling order among enabled nodes: asc | desc")
                ->check(CLI::IsMember({"asc", "desc"}));
        }
    };
    common(app.add_subcommand("compose", "compose the manifest's units and type-check them"), false);
    auto* emit = app.add_subcommand("emit", "print the composition report");
    common(emit, false);
    emit->add_option("--emit,-o", cfg.output, "write the report to a file");
    common(app.add_subcommand("check", "evaluate every invariant on a model"), true);
    common(app.add_subcommand("run", "run the entry operation on each matching root object"), true);
    auto* bench = app.add_subcommand("bench", "time the entry operation on fresh model copies");
    common(bench, true);
    bench->add_option("--reps", cfg.repetitions, "repetitions")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return ExitParse;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!contracts.empty())
        cfg.policy = contract_policy_from_name(contracts);
    cfg.tiebreak = tiebreak == "desc" ? TieBreak::Descending : TieBreak::Ascending;
    if (&err == &std::cerr) {
        const char* env = std::getenv("MASHUP_COLOR");
        cfg.color = ::isatty(2) && !(env && std::string(env) == "0");
    }
    return run_cli(cfg, out, err);
}

} // namespace mashup
