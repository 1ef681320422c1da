#include "inspire/prompts.hpp"
#include "inspire/error.hpp"

#include <array>
#include <set>

namespace inspire::llm {

namespace {

constexpr std::string_view kSystemLlm =
    "You are an expert in mobile app development and requirements engineering.\n"
    "You excel at decomposing high-level features into detailed sub-features.";

constexpr std::string_view kSystemAppStore =
    "You are an expert in mobile app development and requirements engineering.\n"
    "You excel at decomposing high-level features into detailed sub-features.\n"
    "Additionally, your expertise extends to extracting app features from descriptions, enabling you to "
    "identify key functionalities like \"step count\", \"group chats\", and \"multi-device synchronization\".";

constexpr std::string_view kRefineSingle =
    "**Feature**\n"
    "\n"
    "```\n"
    "{feature}: {feature_description}\n"
    "```\n"
    "\n"
    "Given the mobile app feature above, please refine it to a list of sub-features.\n"
    "\n"
    "Ensure that the number of sub-features is {n}.\n"
    "\n"
    "The output should be a list of JSON formatted objects like this:\n"
    "\n"
    "[{\n"
    "\"sub-feature\": sub-feature,\n"
    "\"description\": description\n"
    "}]";

constexpr std::string_view kRefineContext =
    "**Super Feature**\n"
    "\n"
    "```\n"
    "super-feature: {super_feature}\n"
    "description: {super_feature_description}\n"
    "```\n"
    "\n"
    "Knowing that the feature \"{super_feature}\" above is refined into a list of the following features:\n"
    "\n"
    "```\n"
    "{sub_features}\n"
    "```\n"
    "\n"
    "Please refine the following feature to a list of sub-features.\n"
    "\n"
    "Ensure that the number of sub-features is {n}.\n"
    "\n"
    "**Feature**\n"
    "\n"
    "```\n"
    "{feature_with_desc}\n"
    "```\n"
    "\n"
    "The output should be a list of JSON formatted objects like this:\n"
    "\n"
    "[{\n"
    "\"sub-feature\": sub-feature,\n"
    "\"description\": description\n"
    "}]";

constexpr std::string_view kExtract =
    "**App description**\n"
    "\n"
    "```\n"
    "{app_description}\n"
    "```\n"
    "\n"
    "From the app description above, please extract the sub-features of this following feature.\n"
    "\n"
    "Ensure that all sub-features are from the app description.\n"
    "\n"
    "**Feature**\n"
    "\n"
    "```\n"
    "{feature_with_desc}\n"
    "```\n"
    "\n"
    "The output should be a list of JSON formatted objects like this:\n"
    "\n"
    "[{\n"
    "\"sub-feature\": sub-feature,\n"
    "\"description\": description\n"
    "}]";

// Context extraction: the super-feature block of the context refinement
// prompt in front of the plain extraction prompt.
constexpr std::string_view kExtractContext =
    "**Super Feature**\n"
    "\n"
    "```\n"
    "super-feature: {super_feature}\n"
    "description: {super_feature_description}\n"
    "```\n"
    "\n"
    "**App description**\n"
    "\n"
    "```\n"
    "{app_description}\n"
    "```\n"
    "\n"
    "From the app description above, please extract the sub-features of this following feature.\n"
    "\n"
    "Ensure that all sub-features are from the app description.\n"
    "\n"
    "**Feature**\n"
    "\n"
    "```\n"
    "{feature_with_desc}\n"
    "```\n"
    "\n"
    "The output should be a list of JSON formatted objects like this:\n"
    "\n"
    "[{\n"
    "\"sub-feature\": sub-feature,\n"
    "\"description\": description\n"
    "}]";

constexpr std::string_view kSelect =
    "```json\n"
    "{features}\n"
    "```\n"
    "\n"
    "Given the JSON lists of app features provided above, please combine them into a single list.\n"
    "\n"
    "Ensure that similar sub-features are merged into one.\n"
    "\n"
    "You should only keep {n} sub-features that are most relevant to the following feature description:\n"
    "\n"
    "```\n"
    "{feature_with_desc}\n"
    "```\n"
    "\n"
    "The output should be a list of JSON formatted objects like this:\n"
    "\n"
    "[{\n"
    "\"sub-feature\": sub-feature,\n"
    "\"description\": description,\n"
    "\"source-app-id\": source-app-id\n"
    "}]";

const std::set<std::string, std::less<>>& known_placeholders() {
    static const std::set<std::string, std::less<>> names = {
        "feature",  "feature_description", "feature_with_desc", "super_feature", "super_feature_description",
        "sub_features", "app_description", "features", "n"};
    return names;
}

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls on_placeholder(name) for each {name} in body that is a known
// placeholder and on_text(literal) for everything else.
template <typename Text, typename Placeholder>
void scan(std::string_view body, Text on_text, Placeholder on_placeholder) {
    std::size_t literal_start = 0;
    std::size_t pos = 0;
    while ((pos = body.find('{', pos)) != std::string_view::npos) {
        std::size_t end = pos + 1;
        while (end < body.size() && is_ident_char(body[end])) ++end;
        if (end < body.size() && body[end] == '}' && end > pos + 1) {
            const auto name = body.substr(pos + 1, end - pos - 1);
            if (known_placeholders().count(name)) {
                on_text(body.substr(literal_start, pos - literal_start));
                on_placeholder(name);
                pos = literal_start = end + 1;
                continue;
            }
        }
        ++pos;
    }
    on_text(body.substr(literal_start));
}

PromptTemplate make(TemplateId id, std::string_view body) {
    PromptTemplate t{id, body, {}};
    scan(
        body, [](std::string_view) {},
        [&](std::string_view name) {
            for (const auto& p : t.placeholders) {
                if (p == name) return;
            }
            t.placeholders.emplace_back(name);
        });
    return t;
}

}  // namespace

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::system_llm: return "system_llm";
        case TemplateId::system_appstore: return "system_appstore";
        case TemplateId::refine_single: return "refine_single";
        case TemplateId::refine_context: return "refine_context";
        case TemplateId::extract: return "extract";
        case TemplateId::extract_context: return "extract_context";
        case TemplateId::select: return "select";
    }
    return "unknown";
}

TemplateId template_from_string(std::string_view name) {
    for (auto id : {TemplateId::system_llm, TemplateId::system_appstore, TemplateId::refine_single,
                    TemplateId::refine_context, TemplateId::extract, TemplateId::extract_context,
                    TemplateId::select}) {
        if (to_string(id) == name) return id;
    }
    throw Error(ErrorCode::validation, "unknown template '" + std::string(name) + "'");
}

const PromptTemplate& prompt_template(TemplateId id) {
    static const std::array<PromptTemplate, 7> templates = {
        make(TemplateId::system_llm, kSystemLlm),
        make(TemplateId::system_appstore, kSystemAppStore),
        make(TemplateId::refine_single, kRefineSingle),
        make(TemplateId::refine_context, kRefineContext),
        make(TemplateId::extract, kExtract),
        make(TemplateId::extract_context, kExtractContext),
        make(TemplateId::select, kSelect),
    };
    return templates[static_cast<std::size_t>(id)];
}

std::string render(TemplateId id, const Bindings& bindings) {
    const auto& t = prompt_template(id);
    for (const auto& name : t.placeholders) {
        if (!bindings.count(name)) {
            throw Error(ErrorCode::validation,
                        "template " + std::string(to_string(id)) + " is missing a binding for {" + name + "}");
        }
    }
    std::string out;
    scan(
        t.body, [&](std::string_view literal) { out += literal; },
        [&](std::string_view name) { out += bindings.find(std::string(name))->second; });
    return out;
}

std::string feature_with_desc(std::string_view name, std::string_view description) {
    std::string s(name);
    s += ": ";
    s += description;
    return s;
}

}  // namespace inspire::llm
