#ifndef MASHUP_CLI_HPP
#define MASHUP_CLI_HPP

#include "mashup/composer.hpp"
#include "mashup/interpreter.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mashup {

/// Exit codes of the `mashup` tool.
enum ExitCode : int {
    ExitOk = 0,
    ExitParse = 1, // also unreadable files and usage errors
    ExitComposition = 2,
    ExitType = 3, // type errors and model conformance errors
    ExitContract = 4,
    ExitRuntime = 5,
};

struct CliConfig {
    std::string command;
    std::filesystem::path manifest;
    std::filesystem::path model;
    std::optional<std::string> entry;
    std::optional<ContractPolicy> policy;
    std::optional<std::filesystem::path> output;
    int repetitions = 30;
    TieBreak tiebreak = TieBreak::Ascending;
    bool color = false;
};

/// A composed and type-checked language, ready to load models.
struct Language {
    MashupManifest manifest;
    std::vector<LoadedUnit> units;
    WovenModel woven;
};

/// Manifest -> units -> compose -> typecheck. Throws DiagnosticError.
std::unique_ptr<Language> load_language(const std::filesystem::path& manifest);

/// Reads and loads a model file against `lang`. Throws DiagnosticError.
ModelInstance load_model_file(const std::filesystem::path& path, const Language& lang);

std::optional<EntryPoint> parse_entry(const std::string& text);

int run_cli(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (without the program name) and runs. Usage errors exit 1.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mashup

#endif // MASHUP_CLI_HPP
