#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "redos/openapi.hpp"

using namespace redos;

namespace {

std::string read_fixture(const char* name) {
    std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const char* kMinimalDoc = R"({
  "openapi": "3.0.0",
  "info": {"title": "t", "version": "1"},
  "servers": [{"url": "http://api.example.com/v1"}],
  "paths": {
    "/things": {
      "post": {
        "requestBody": {"content": {"application/json": {"schema":
          {"type": "string", "pattern": "(a|a)*b"}}}},
        "responses": {"200": {"description": "ok"}}
      }
    }
  }
})";

}  // namespace

TEST_CASE("load_openapi: minimal document with one pattern") {
    ApiModel m = load_openapi(kMinimalDoc, DocumentFormat::Json, "minimal");
    auto surfaces = extract_surfaces(m);
    REQUIRE(surfaces.size() == 1);
    CHECK(surfaces[0].pattern == "(a|a)*b");
    CHECK(surfaces[0].method == "POST");
    CHECK(surfaces[0].path_template == "/things");
    CHECK(surfaces[0].server_url == "http://api.example.com/v1");
    CHECK(surfaces[0].anchor_mode == AnchorMode::UnanchoredSearch);
    CHECK(surfaces[0].field_locator.kind == FieldLocator::Kind::Body);
}

TEST_CASE("load_openapi: $ref chain resolves through to the pattern") {
    ApiModel m = load_openapi(read_fixture("target_api.json"), DocumentFormat::Json, "fixture");
    auto surfaces = extract_surfaces(m);
    REQUIRE(surfaces.size() == 1);
    CHECK(surfaces[0].pattern == "(a|a)*b");
    CHECK(surfaces[0].field_locator.name == "/customer");
    // Required siblings of the same request are enumerated.
    bool qty_listed = false;
    for (const auto& [loc, schema] : surfaces[0].sibling_constraints)
        if (loc == "body:/qty" && schema.value("type", "") == "integer") qty_listed = true;
    CHECK(qty_listed);
}

TEST_CASE("load_openapi: $ref cycle is rejected") {
    const char* doc = R"({
      "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
      "paths": {},
      "components": {"schemas": {
        "A": {"$ref": "#/components/schemas/B"},
        "B": {"$ref": "#/components/schemas/A"}
      }}
    })";
    CHECK_THROWS_AS(load_openapi(doc, DocumentFormat::Json), RefCycle);
}

TEST_CASE("load_openapi: version and parse errors") {
    CHECK_THROWS_AS(load_openapi(R"({"openapi": "2.0", "paths": {}})", DocumentFormat::Json),
                    UnsupportedVersion);
    CHECK_THROWS_AS(load_openapi(R"({"swagger": "2.0"})", DocumentFormat::Json),
                    UnsupportedVersion);
    try {
        load_openapi("{\n  \"openapi\": \"3.0.0\",\n  oops\n}", DocumentFormat::Json);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("load_openapi: YAML and JSON forms agree") {
    const char* yaml = R"(openapi: "3.0.0"
info:
  title: t
  version: "1"
servers:
  - url: http://api.example.com/v1
paths:
  /things:
    post:
      requestBody:
        content:
          application/json:
            schema:
              type: string
              pattern: "(a|a)*b"
      responses:
        "200":
          description: ok
)";
    ApiModel mj = load_openapi(kMinimalDoc, DocumentFormat::Json, "doc");
    ApiModel my = load_openapi(yaml, DocumentFormat::Yaml, "doc");
    auto sj = extract_surfaces(mj);
    auto sy = extract_surfaces(my);
    REQUIRE(sj.size() == 1);
    REQUIRE(sy.size() == 1);
    CHECK(sj[0].to_json() == sy[0].to_json());
}

TEST_CASE("extract_surfaces: response-only patterns are excluded") {
    const char* doc = R"({
      "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
      "paths": {"/things": {"get": {"responses": {"200": {"description": "ok",
        "content": {"application/json": {"schema":
          {"type": "string", "pattern": "(a|a)*b"}}}}}}}}
    })";
    ApiModel m = load_openapi(doc, DocumentFormat::Json);
    CHECK(extract_surfaces(m).empty());
}

TEST_CASE("extract_surfaces: two operations sharing a $ref'd pattern") {
    const char* doc = R"({
      "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
      "paths": {
        "/a": {"post": {"requestBody": {"content": {"application/json": {"schema":
          {"$ref": "#/components/schemas/S"}}}}}},
        "/b": {"put": {"requestBody": {"content": {"application/json": {"schema":
          {"$ref": "#/components/schemas/S"}}}}}}
      },
      "components": {"schemas": {"S": {"type": "string", "pattern": "a*a*b"}}}
    })";
    ApiModel m = load_openapi(doc, DocumentFormat::Json);
    auto surfaces = extract_surfaces(m);
    REQUIRE(surfaces.size() == 2);
    CHECK(surfaces[0].pattern == surfaces[1].pattern);
    CHECK(surfaces[0].path_template != surfaces[1].path_template);
}

TEST_CASE("extract_surfaces: pattern on a path parameter") {
    const char* doc = R"({
      "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
      "paths": {"/items/{code}": {"get": {
        "parameters": [{"name": "code", "in": "path", "required": true,
                        "schema": {"type": "string", "pattern": "[a-z]+"}}],
        "responses": {"200": {"description": "ok"}}}}}
    })";
    ApiModel m = load_openapi(doc, DocumentFormat::Json);
    auto surfaces = extract_surfaces(m);
    REQUIRE(surfaces.size() == 1);
    CHECK(surfaces[0].field_locator.kind == FieldLocator::Kind::Path);
    CHECK(surfaces[0].field_locator.name == "code");
}

TEST_CASE("extract_surfaces: one surface per alternation branch") {
    const char* doc = R"({
      "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
      "paths": {"/things": {"post": {"requestBody": {"content": {"application/json": {"schema":
        {"anyOf": [
          {"type": "string", "pattern": "a*b"},
          {"type": "string", "pattern": "c*d"}
        ]}}}}}}}
    })";
    ApiModel m = load_openapi(doc, DocumentFormat::Json);
    auto surfaces = extract_surfaces(m);
    REQUIRE(surfaces.size() == 2);
    CHECK(surfaces[0].branch == "anyOf/0");
    CHECK(surfaces[1].branch == "anyOf/1");
}

TEST_CASE("extract_surfaces: deterministic and order-stable") {
    ApiModel m = load_openapi(read_fixture("target_api.json"), DocumentFormat::Json, "fixture");
    auto a = extract_surfaces(m);
    auto b = extract_surfaces(m);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].to_json() == b[i].to_json());
}

TEST_CASE("surface round-trips through JSON") {
    ApiModel m = load_openapi(read_fixture("target_api.json"), DocumentFormat::Json, "fixture");
    auto surfaces = extract_surfaces(m);
    REQUIRE(!surfaces.empty());
    ApiSurface back = ApiSurface::from_json(surfaces[0].to_json());
    CHECK(back.to_json() == surfaces[0].to_json());
}

TEST_CASE("extract_html_patterns: fixture page") {
    auto surfaces = extract_html_patterns(read_fixture("forms.html"),
                                          "https://shop.example.com/checkout/page");
    REQUIRE(surfaces.size() == 2);  // the orphan input has no submit target
    CHECK(surfaces[0].field_name == "card");
    CHECK(surfaces[0].pattern == "(\\d+)+");
    CHECK(surfaces[0].form_method == "post");
    CHECK(surfaces[0].form_action == "https://shop.example.com/submit-card");
    CHECK(surfaces[1].field_name == "iban");
    CHECK(surfaces[1].form_action == "https://pay.example.com/iban");
}

TEST_CASE("extract_html_patterns: relative action and default method") {
    auto surfaces = extract_html_patterns(
        "<form action='submit'><input name=x pattern='a*b'></form>",
        "https://example.com/dir/page.html");
    REQUIRE(surfaces.size() == 1);
    CHECK(surfaces[0].form_action == "https://example.com/dir/submit");
    CHECK(surfaces[0].form_method == "get");
}

TEST_CASE("extract_html_patterns: tolerant of malformed input") {
    CHECK(extract_html_patterns("<<<form<input pattern", "http://x").empty());
    CHECK(extract_html_patterns("", "http://x").empty());
    auto s = extract_html_patterns("<FORM ACTION=/a><INPUT NAME=f PATTERN=a+b></FORM>",
                                   "http://x.example");
    REQUIRE(s.size() == 1);
    CHECK(s[0].pattern == "a+b");
}

TEST_CASE("load_corpus: newline-delimited") {
    auto records = load_corpus("a*b\n\n(a|a)*b\na*b\n");
    REQUIRE(records.size() == 3);
    CHECK(records[0].pattern == "a*b");
    CHECK(records[2].pattern == "a*b");        // duplicates preserved
    CHECK(records[0].origin != records[2].origin);  // with distinct origins
    CHECK(records[0].anchor_mode == AnchorMode::FullMatch);
}

TEST_CASE("load_corpus: header sets the file-wide anchor mode") {
    auto records = load_corpus("# anchor_mode: unanchored_search\na*b\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].anchor_mode == AnchorMode::UnanchoredSearch);
    CHECK_THROWS_AS(load_corpus("# anchor_mode: sideways\na\n"), ParseError);
}

TEST_CASE("load_corpus: JSON array with origins") {
    auto records = load_corpus(
        R"([{"pattern": "a*b", "origin": "site-1"}, "c*d",
            {"pattern": "e*f", "origin": "site-2", "anchor_mode": "unanchored_search"}])");
    REQUIRE(records.size() == 3);
    CHECK(records[0].origin == "site-1");
    CHECK(records[1].pattern == "c*d");
    CHECK(records[2].anchor_mode == AnchorMode::UnanchoredSearch);
}

TEST_CASE("load_corpus: parse errors carry a line number") {
    try {
        load_corpus("[\n{\"pattern\": \"a\"},\noops\n]");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(load_corpus(R"([42])"), ParseError);
}

TEST_CASE("load_corpus: fixture corpus loads and ignores annotation keys") {
    auto records = load_corpus(read_fixture("corpus.json"));
    CHECK(records.size() == 30);
    for (const auto& r : records) CHECK(!r.pattern.empty());
}
