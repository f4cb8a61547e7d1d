#include "redos/openapi.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace redos {

namespace {

struct Tag {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    bool closing = false;
    std::size_t end = 0;  // offset just past '>'
};

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower((unsigned char)a[i]) != std::tolower((unsigned char)b[i])) return false;
    return true;
}

std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower((unsigned char)c));
    return s;
}

// Scans one tag starting at `pos` (which points at '<'); tolerant of
// malformed input -- returns nullopt when this is not a parseable tag.
std::optional<Tag> scan_tag(std::string_view html, std::size_t pos) {
    Tag t;
    std::size_t i = pos + 1;
    if (i < html.size() && html[i] == '/') {
        t.closing = true;
        ++i;
    }
    std::size_t name_start = i;
    while (i < html.size() && (std::isalnum((unsigned char)html[i]) || html[i] == '-')) ++i;
    if (i == name_start) return std::nullopt;
    t.name = lower(std::string(html.substr(name_start, i - name_start)));
    while (i < html.size() && html[i] != '>') {
        if (std::isspace((unsigned char)html[i]) || html[i] == '/') {
            ++i;
            continue;
        }
        std::size_t as = i;
        while (i < html.size() && html[i] != '=' && html[i] != '>' && html[i] != '/' &&
               !std::isspace((unsigned char)html[i]))
            ++i;
        std::string attr = lower(std::string(html.substr(as, i - as)));
        std::string value;
        while (i < html.size() && std::isspace((unsigned char)html[i])) ++i;
        if (i < html.size() && html[i] == '=') {
            ++i;
            while (i < html.size() && std::isspace((unsigned char)html[i])) ++i;
            if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
                char quote = html[i++];
                std::size_t vs = i;
                while (i < html.size() && html[i] != quote) ++i;
                value = std::string(html.substr(vs, i - vs));
                if (i < html.size()) ++i;
            } else {
                std::size_t vs = i;
                while (i < html.size() && html[i] != '>' && !std::isspace((unsigned char)html[i]))
                    ++i;
                value = std::string(html.substr(vs, i - vs));
            }
        }
        if (!attr.empty()) t.attrs.emplace_back(std::move(attr), std::move(value));
    }
    if (i >= html.size()) return std::nullopt;
    t.end = i + 1;
    return t;
}

std::string attr_of(const Tag& t, std::string_view name, std::string fallback = "") {
    for (const auto& [k, v] : t.attrs)
        if (iequals(k, name)) return v;
    return fallback;
}

std::string resolve_url(const std::string& base, const std::string& action) {
    if (action.empty()) return base;
    if (action.find("://") != std::string::npos) return action;
    auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) return action;
    if (action[0] == '/') {
        auto host_end = base.find('/', scheme_end + 3);
        return (host_end == std::string::npos ? base : base.substr(0, host_end)) + action;
    }
    auto last_slash = base.rfind('/');
    if (last_slash != std::string::npos && last_slash > scheme_end + 2)
        return base.substr(0, last_slash + 1) + action;
    return base + "/" + action;
}

}  // namespace

std::vector<FormSurface> extract_html_patterns(std::string_view html, const std::string& base_url) {
    std::vector<FormSurface> out;
    std::optional<Tag> form;  // innermost open form; inputs outside forms have no submit target
    for (std::size_t pos = html.find('<'); pos != std::string_view::npos;
         pos = html.find('<', pos + 1)) {
        auto tag = scan_tag(html, pos);
        if (!tag) continue;
        if (tag->name == "form") {
            if (tag->closing) {
                form.reset();
            } else {
                form = *tag;
            }
        } else if (tag->name == "input" && !tag->closing && form) {
            std::string pattern = attr_of(*tag, "pattern");
            bool has_pattern = false;
            for (const auto& [k, v] : tag->attrs)
                if (iequals(k, "pattern")) has_pattern = true;
            if (!has_pattern) continue;
            FormSurface s;
            s.page = base_url;
            s.form_action = resolve_url(base_url, attr_of(*form, "action"));
            s.form_method = lower(attr_of(*form, "method", "get"));
            s.field_name = attr_of(*tag, "name");
            s.pattern = pattern;
            out.push_back(std::move(s));
        }
        pos = tag->end - 1;
    }
    return out;
}

std::vector<CorpusRecord> load_corpus(std::string_view file, AnchorMode default_mode) {
    std::vector<CorpusRecord> out;
    std::size_t first = file.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return out;

    if (file[first] == '[') {
        Json arr;
        try {
            arr = Json::parse(file);
        } catch (const nlohmann::json::parse_error& e) {
            std::size_t line = 1 + std::size_t(std::count(file.begin(),
                                                          file.begin() + std::min(e.byte,
                                                                                  file.size()),
                                                          '\n'));
            throw ParseError(e.what(), line);
        }
        std::size_t idx = 0;
        for (const auto& e : arr) {
            CorpusRecord r;
            r.anchor_mode = default_mode;
            if (e.is_string()) {
                r.pattern = e.get<std::string>();
                r.origin = "entry " + std::to_string(idx);
            } else if (e.is_object() && e.contains("pattern") && e["pattern"].is_string()) {
                r.pattern = e["pattern"].get<std::string>();
                r.origin = e.value("origin", "entry " + std::to_string(idx));
                if (e.contains("anchor_mode"))
                    r.anchor_mode = e["anchor_mode"] == "unanchored_search"
                                        ? AnchorMode::UnanchoredSearch
                                        : AnchorMode::FullMatch;
            } else {
                throw ParseError("corpus entry " + std::to_string(idx) +
                                 " is neither a string nor an object with a pattern");
            }
            out.push_back(std::move(r));
            ++idx;
        }
        return out;
    }

    // Newline-delimited. An optional header line "# anchor_mode: <mode>" sets
    // the file-wide default; other "#" lines are comments.
    AnchorMode mode = default_mode;
    std::size_t line_no = 0, pos = 0;
    while (pos <= file.size()) {
        std::size_t eol = file.find('\n', pos);
        std::string_view line = file.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        ++line_no;
        pos = eol == std::string_view::npos ? file.size() + 1 : eol + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto key = line.find("anchor_mode:");
            if (key != std::string_view::npos) {
                std::string_view v = line.substr(key + 12);
                while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
                if (v == "full_match") mode = AnchorMode::FullMatch;
                else if (v == "unanchored_search") mode = AnchorMode::UnanchoredSearch;
                else throw ParseError("unknown anchor_mode in corpus header", line_no);
            }
            continue;
        }
        CorpusRecord r;
        r.pattern = std::string(line);
        r.origin = "line " + std::to_string(line_no);
        r.anchor_mode = mode;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace redos
