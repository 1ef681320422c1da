#pragma once

#include <optional>
#include <string>

namespace inspire {

struct Feature {
    std::string name;
    std::string description;

    friend bool operator==(const Feature&, const Feature&) = default;
};

// A refinement result. source_app_id is set only by the AppStore pipeline.
struct SubFeature {
    std::string name;
    std::string description;
    std::optional<std::string> source_app_id;

    Feature feature() const { return {name, description}; }
    friend bool operator==(const SubFeature&, const SubFeature&) = default;
};

}  // namespace inspire
