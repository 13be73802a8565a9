#pragma once

#include "actmc/model.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace actmc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schema: docs/model-format.md.  Structural problems throw ParseError with a
// field path or line/column; admissibility is left to validate().
Model parse_model_text(const std::string& text);
Model parse_model_file(const std::string& path);

nlohmann::ordered_json model_to_json(const Model& m);
std::string emit_model(const Model& m);

// Parameter assignments "a=1.5,b=3/2".
std::vector<std::pair<std::string, Rational>> parse_assignments(const std::string& text);

}  // namespace actmc
