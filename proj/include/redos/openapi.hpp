#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "redos/ast.hpp"

namespace redos {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line(line) {}
    std::size_t line;
};

struct RefCycle : std::runtime_error {
    explicit RefCycle(const std::string& ref)
        : std::runtime_error("$ref cycle through " + ref) {}
};

struct UnsupportedVersion : std::runtime_error {
    explicit UnsupportedVersion(const std::string& v)
        : std::runtime_error("unsupported OpenAPI version: " + v) {}
};

enum class DocumentFormat { Json, Yaml };

// OpenAPI document with internal $refs resolved.
struct ApiModel {
    Json doc;
    std::string source;  // identifier (typically the file name)
    std::vector<std::string> server_urls;
    std::vector<std::string> warnings;
};

struct FieldLocator {
    enum class Kind { Query, Path, Header, Body };
    Kind kind = Kind::Body;
    // Parameter name, or instance JSON pointer for body fields (e.g. "/card").
    std::string name;

    std::string to_string() const;
    static FieldLocator from_string(const std::string& s);
    bool operator==(const FieldLocator&) const = default;
};

// One regex-constrained input field of one operation.
struct ApiSurface {
    std::string source_document;
    std::string server_url;
    std::string path_template;
    std::string method;  // upper-case verb
    FieldLocator field_locator;
    std::string pattern;
    std::string branch;  // allOf/anyOf/oneOf branch path, empty otherwise
    AnchorMode anchor_mode = AnchorMode::UnanchoredSearch;
    Json body_schema;       // resolved request body schema (null when absent)
    Json parameters;        // resolved parameter objects (array)
    std::vector<std::pair<std::string, Json>> sibling_constraints;

    Json to_json() const;
    static ApiSurface from_json(const Json& j);
};

// One pattern-bearing input element of one HTML form.
struct FormSurface {
    std::string page;
    std::string form_action;
    std::string form_method;
    std::string field_name;
    std::string pattern;  // analyzed FullMatch

    Json to_json() const;
};

struct CorpusRecord {
    std::string pattern;
    std::string origin;
    AnchorMode anchor_mode = AnchorMode::FullMatch;
};

ApiModel load_openapi(std::string_view document, DocumentFormat format,
                      std::string source = "document");

std::vector<ApiSurface> extract_surfaces(const ApiModel& model);

std::vector<FormSurface> extract_html_patterns(std::string_view html, const std::string& base_url);

std::vector<CorpusRecord> load_corpus(std::string_view file,
                                      AnchorMode default_mode = AnchorMode::FullMatch);

}  // namespace redos
