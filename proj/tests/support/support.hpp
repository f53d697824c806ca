#ifndef MASHUP_TESTS_SUPPORT_HPP
#define MASHUP_TESTS_SUPPORT_HPP

#include "mashup/cli.hpp"
#include "mashup/composer.hpp"
#include "mashup/interpreter.hpp"
#include "mashup/model.hpp"
#include "mashup/typecheck.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testing {

inline std::filesystem::path fixture(const std::string& rel)
{
    return std::filesystem::path(MASHUP_FIXTURE_DIR) / rel;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using Files = std::vector<std::pair<std::string, std::string>>;

/// Units held in memory, required in the given order.
inline std::vector<mashup::LoadedUnit> load_units(const Files& files)
{
    mashup::MemoryUnitLoader loader;
    mashup::MashupManifest m;
    m.package_name = "test";
    for (const auto& [name, text] : files) {
        loader.add(name, text);
        m.imports.push_back(name);
    }
    return mashup::resolve_requires(m, loader);
}

/// Parse + compose + typecheck. The returned pointer keeps the woven model at
/// a stable address for ModelInstance.
inline std::unique_ptr<mashup::WovenModel> weave(const Files& files)
{
    auto units = load_units(files);
    auto wm = std::make_unique<mashup::WovenModel>(mashup::compose(units, "test"));
    auto diags = mashup::typecheck_units(units, *wm);
    if (!diags.empty())
        throw mashup::DiagnosticError(mashup::Stage::Type, std::move(diags));
    return wm;
}

inline std::unique_ptr<mashup::Language> fuml()
{
    return mashup::load_language(fixture("fuml-lite/fuml.mashup"));
}

/// Seeded generator with the few draws the property tests need.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(g_); }
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))]; }
    std::mt19937_64& engine() { return g_; }

private:
    std::mt19937_64 g_;
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

inline CliResult cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = mashup::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace testing

#endif // MASHUP_TESTS_SUPPORT_HPP
