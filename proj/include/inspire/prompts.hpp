#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace inspire::llm {

enum class TemplateId {
    system_llm,
    system_appstore,
    refine_single,
    refine_context,
    extract,
    extract_context,
    select,
};

std::string_view to_string(TemplateId id);
TemplateId template_from_string(std::string_view name);

struct PromptTemplate {
    TemplateId id;
    std::string_view body;
    std::vector<std::string> placeholders;  // in order of first appearance
};

const PromptTemplate& prompt_template(TemplateId id);

using Bindings = std::map<std::string, std::string>;

// Single-pass substitution of {name} placeholders. Braces that do not form a
// declared placeholder (the JSON example in the body) are copied verbatim and
// bound values are never re-scanned. Throws Error(validation) naming the
// first unbound placeholder.
std::string render(TemplateId id, const Bindings& bindings);

// "{name}: {description}", the form used for {feature_with_desc}.
std::string feature_with_desc(std::string_view name, std::string_view description);

}  // namespace inspire::llm
