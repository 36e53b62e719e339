#include "discrimq/app/cli.hpp"

#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "discrimq/app/config.hpp"
#include "discrimq/app/pipeline.hpp"
#include "discrimq/errors.hpp"

namespace discrimq::app {

namespace {

using StageFn = std::function<Status(RunConfig const&)>;

struct StageSpec {
    std::string name;
    std::string help;
    StageFn run;
};

std::vector<StageSpec> const& stages() {
    static std::vector<StageSpec> const all{
        {"synth", "write the synthetic micro-world corpus", stage_synth},
        {"ingest", "validate the corpus, build vocabularies and splits", stage_ingest},
        {"train-attr", "train the attribute recognizer", stage_train_attr},
        {"train-vqa", "train the VQA model for question similarity", stage_train_vqa},
        {"train-qgen", "train the attribute-conditioned question generator", stage_train_qgen},
        {"train-baseline", "train the unconditioned CNN-LSTM generator", stage_train_baseline},
        {"select", "tune alpha/beta and rank attribute pairs", stage_select},
        {"generate", "generate questions for the test pairs", stage_generate},
        {"evaluate", "score generated questions (delta-BLEU, BLEU)", stage_evaluate},
        {"gradcheck", "finite-difference gradient checks", stage_gradcheck},
        {"report", "methods x metrics table", stage_report},
    };
    return all;
}

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::map<std::string, std::string> direct;
    bool hard = false;
};

void add_common(CLI::App& cmd, Flags& flags) {
    cmd.add_option("--config", flags.config, "JSON config file");
    cmd.add_option("--set", flags.sets, "override a config key, e.g. --set beam.width=3")->take_all();
    static std::vector<std::pair<std::string, std::string>> const direct{
        {"profile", "profile"},      {"out", "paths.out"},       {"corpus", "paths.corpus"},
        {"seed", "seed"},            {"alpha", "selector.alpha"}, {"beta", "selector.beta"},
        {"top-k", "selector.top_k"}, {"mode", "selector.mode"},   {"method", "method"},
        {"width", "beam.width"},     {"max-len", "beam.max_len"},
    };
    for (auto const& [flag, key] : direct) {
        std::string const k = key;
        cmd.add_option_function<std::string>(
            "--" + flag, [&flags, k](std::string const& v) { flags.direct[k] = v; }, "sets " + key);
    }
    cmd.add_flag("--hard", flags.hard, "restrict to the hard subset (evaluate, report)");
}

Overrides collect_overrides(Flags const& flags) {
    Overrides overrides;
    for (auto const& s : flags.sets) {
        auto const eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects key=value, got '" + s + "'");
        }
        overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (auto const& [key, value] : flags.direct) {
        overrides[key] = value;
    }
    if (flags.hard) {
        overrides["hard"] = "true";
    }
    return overrides;
}

nlohmann::ordered_json error_line(std::string const& stage, std::string const& kind, std::string const& message) {
    return {{"stage", stage}, {"status", "error"}, {"error", kind}, {"message", message}};
}

}  // namespace

int run_command(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discriminative question generation for ambiguous region pairs", "discrimq"};
    app.require_subcommand(1, 1);
    Flags flags;
    std::map<CLI::App*, StageSpec const*> by_cmd;
    for (auto const& spec : stages()) {
        auto* cmd = app.add_subcommand(spec.name, spec.help);
        add_common(*cmd, flags);
        by_cmd[cmd] = &spec;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();
    }
    try {
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kExitOk;
    } catch (CLI::ParseError const& e) {
        err << e.what() << "\n" << app.help();
        return kExitValidation;
    }

    auto* cmd = app.get_subcommands().front();
    StageSpec const& spec = *by_cmd.at(cmd);
    try {
        auto config = load_config(flags.config, collect_overrides(flags));
        echo_config(config, spec.name);
        Status status = spec.run(config);
        bool const passed = status.value("passed", true);
        nlohmann::ordered_json line{{"stage", spec.name}, {"status", passed ? "ok" : "failed"}};
        for (auto const& [key, value] : status.items()) {
            line[key] = value;
        }
        out << line.dump() << "\n";
        return passed ? kExitOk : kExitRuntime;
    } catch (ValidationError const& e) {
        err << "error: " << e.what() << "\n";
        out << error_line(spec.name, "validation", e.what()).dump() << "\n";
        return kExitValidation;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << "\n";
        out << error_line(spec.name, "runtime", e.what()).dump() << "\n";
        return kExitRuntime;
    }
}

}  // namespace discrimq::app
