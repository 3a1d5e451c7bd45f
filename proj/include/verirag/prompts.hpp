#pragma once
// Prompt templates are UTF-8 asset files with {{name}} placeholders.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"

namespace verirag {

enum class PromptId {
    PaperAnalysis,
    ClaimFeatures,
    BatchAudit,
    Cot,
    SelfragCritique,
    SelfragSynthesis,
    FlareAssess,
    FlareFinal,
    CiberProbe,
};

inline constexpr std::array<PromptId, 9> kAllPrompts = {
    PromptId::PaperAnalysis,   PromptId::ClaimFeatures,    PromptId::BatchAudit,
    PromptId::Cot,             PromptId::SelfragCritique,  PromptId::SelfragSynthesis,
    PromptId::FlareAssess,     PromptId::FlareFinal,       PromptId::CiberProbe};

inline std::string_view prompt_file(PromptId id) {
    switch (id) {
    case PromptId::PaperAnalysis: return "paper_analysis.txt";
    case PromptId::ClaimFeatures: return "claim_features.txt";
    case PromptId::BatchAudit: return "batch_audit.txt";
    case PromptId::Cot: return "cot.txt";
    case PromptId::SelfragCritique: return "selfrag_critique.txt";
    case PromptId::SelfragSynthesis: return "selfrag_synthesis.txt";
    case PromptId::FlareAssess: return "flare_assess.txt";
    case PromptId::FlareFinal: return "flare_final.txt";
    case PromptId::CiberProbe: return "ciber_probe.txt";
    }
    return {};
}

// Single pass: substituted values are never rescanned for placeholders.
inline std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const std::size_t open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        const std::size_t close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw SchemaError("template: unterminated placeholder");
        out.append(tpl.substr(pos, open - pos));
        const std::string name(tpl.substr(open + 2, close - open - 2));
        auto it = vars.find(name);
        if (it == vars.end()) throw SchemaError("template: no value for placeholder '" + name + "'");
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CheckDefinition {
    std::string name;
    std::string instruction;
};

class PromptLibrary {
public:
    PromptLibrary() = default;

    static PromptLibrary load(const std::filesystem::path& dir) {
        PromptLibrary lib;
        for (PromptId id : kAllPrompts) lib.templates_[id] = read_text_file(dir / prompt_file(id));
        const json checks = json::parse(read_text_file(dir / "checks.json"));
        for (CheckId id : kAllChecks) {
            const std::string key = to_string(id);
            if (!checks.contains(key)) throw ConfigError("checks.json: missing " + key);
            lib.checks_[id] = {checks[key].at("name").get<std::string>(),
                               checks[key].at("instruction").get<std::string>()};
        }
        return lib;
    }

    const std::string& text(PromptId id) const { return templates_.at(id); }

    std::string render(PromptId id, const std::map<std::string, std::string>& vars) const {
        return render_template(text(id), vars);
    }

    const CheckDefinition& check(CheckId id) const { return checks_.at(id); }

    // "C4 (Outcome Variability): ..." lines for the given checks.
    std::string check_definitions(const std::vector<CheckId>& ids) const {
        std::string out;
        for (CheckId id : ids) {
            const auto& d = check(id);
            out += to_string(id) + " (" + d.name + "): " + d.instruction + "\n";
        }
        if (!out.empty()) out.pop_back();
        return out;
    }

private:
    std::map<PromptId, std::string> templates_;
    std::map<CheckId, CheckDefinition> checks_;
};

} // namespace verirag
