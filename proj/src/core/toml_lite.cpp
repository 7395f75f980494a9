#include "toml_lite.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace ietlab {

namespace {

[[noreturn]] void fail(size_t line, const std::string& what) {
    std::ostringstream os;
    os << "toml: line " << line << ": " << what;
    throw UsageError(os.str());
}

void skip_ws(const std::string& s, size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_string_lit(const std::string& s, size_t& i, size_t line) {
    // s[i] == '"'
    ++i;
    std::string out;
    while (i < s.size() && s[i] != '"') {
        char c = s[i];
        if (c == '\\') {
            ++i;
            if (i >= s.size()) fail(line, "dangling escape");
            switch (s[i]) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(line, "unsupported escape");
            }
        } else {
            out += c;
        }
        ++i;
    }
    if (i >= s.size()) fail(line, "unterminated string");
    ++i;  // closing quote
    return out;
}

TomlValue parse_scalar_token(const std::string& tok, size_t line) {
    TomlValue v;
    if (tok == "true" || tok == "false") {
        v.kind = TomlValue::Kind::Bool;
        v.b = (tok == "true");
        return v;
    }
    // strip numeric underscores
    std::string t;
    for (char c : tok)
        if (c != '_') t += c;
    if (t.empty()) fail(line, "empty value");
    bool floaty = t.find('.') != std::string::npos || t.find('e') != std::string::npos ||
                  t.find('E') != std::string::npos || t == "inf" || t == "-inf" || t == "nan";
    const char* p = t.c_str();
    char* end = nullptr;
    if (!floaty) {
        long long iv = std::strtoll(p, &end, 10);
        if (end && *end == '\0') {
            v.kind = TomlValue::Kind::Int;
            v.i = iv;
            return v;
        }
    }
    double dv = std::strtod(p, &end);
    if (!end || *end != '\0') fail(line, "cannot parse value '" + tok + "'");
    v.kind = TomlValue::Kind::Float;
    v.f = dv;
    return v;
}

}  // namespace

double TomlValue::as_number() const {
    if (kind == Kind::Int) return static_cast<double>(i);
    if (kind == Kind::Float) return f;
    throw UsageError("toml: value is not a number");
}

long long TomlValue::as_int() const {
    if (kind == Kind::Int) return i;
    throw UsageError("toml: value is not an integer");
}

const std::string& TomlValue::as_str() const {
    if (kind != Kind::Str) throw UsageError("toml: value is not a string");
    return s;
}

bool TomlValue::as_bool() const {
    if (kind != Kind::Bool) throw UsageError("toml: value is not a boolean");
    return b;
}

std::vector<double> TomlValue::as_number_array() const {
    if (kind != Kind::Arr) throw UsageError("toml: value is not an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const TomlValue& v : arr) out.push_back(v.as_number());
    return out;
}

const TomlValue& TomlTable::at(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) throw UsageError("toml: missing key '" + k + "'");
    return it->second;
}

double TomlTable::number_or(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second.as_number();
}

long long TomlTable::int_or(const std::string& k, long long dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second.as_int();
}

std::string TomlTable::str_or(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second.as_str();
}

bool TomlTable::bool_or(const std::string& k, bool dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second.as_bool();
}

const TomlTable& TomlDoc::table(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw UsageError("toml: missing table [" + name + "]");
    return it->second;
}

TomlDoc TomlDoc::parse(const std::string& text) {
    TomlDoc doc;
    TomlTable* cur = &doc.root;

    size_t i = 0, line = 1;
    auto at_eol = [&](size_t j) {
        skip_ws(text, j);
        return j >= text.size() || text[j] == '\n' || text[j] == '#';
    };

    while (i < text.size()) {
        skip_ws(text, i);
        if (i >= text.size()) break;
        char c = text[i];
        if (c == '\n') {
            ++i;
            ++line;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '[') {
            bool isArray = (i + 1 < text.size() && text[i + 1] == '[');
            i += isArray ? 2 : 1;
            std::string name;
            while (i < text.size() && text[i] != ']') name += text[i++];
            if (i >= text.size()) fail(line, "unterminated table header");
            ++i;
            if (isArray) {
                if (i >= text.size() || text[i] != ']') fail(line, "expected ]]");
                ++i;
            }
            // trim
            size_t a = name.find_first_not_of(" \t");
            size_t b = name.find_last_not_of(" \t");
            if (a == std::string::npos) fail(line, "empty table name");
            name = name.substr(a, b - a + 1);
            for (char nc : name)
                if (!is_bare_key_char(nc)) fail(line, "table name outside supported subset");
            if (!at_eol(i)) fail(line, "trailing characters after table header");
            if (isArray) {
                doc.table_arrays[name].emplace_back();
                cur = &doc.table_arrays[name].back();
            } else {
                if (doc.tables.count(name)) fail(line, "duplicate table [" + name + "]");
                cur = &doc.tables[name];
            }
            continue;
        }

        // key = value
        std::string key;
        if (c == '"') {
            key = parse_string_lit(text, i, line);
        } else {
            while (i < text.size() && is_bare_key_char(text[i])) key += text[i++];
        }
        if (key.empty()) fail(line, "expected key");
        skip_ws(text, i);
        if (i >= text.size() || text[i] != '=') fail(line, "expected '=' after key '" + key + "'");
        ++i;
        skip_ws(text, i);
        if (i >= text.size()) fail(line, "missing value");

        TomlValue val;
        if (text[i] == '"') {
            val.kind = TomlValue::Kind::Str;
            val.s = parse_string_lit(text, i, line);
        } else if (text[i] == '[') {
            ++i;
            val.kind = TomlValue::Kind::Arr;
            for (;;) {
                // arrays may span lines
                while (i < text.size() &&
                       (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == ',')) {
                    if (text[i] == '\n') ++line;
                    ++i;
                }
                if (i < text.size() && text[i] == '#') {
                    while (i < text.size() && text[i] != '\n') ++i;
                    continue;
                }
                if (i >= text.size()) fail(line, "unterminated array");
                if (text[i] == ']') {
                    ++i;
                    break;
                }
                if (text[i] == '"') {
                    TomlValue e;
                    e.kind = TomlValue::Kind::Str;
                    e.s = parse_string_lit(text, i, line);
                    val.arr.push_back(std::move(e));
                } else {
                    std::string tok;
                    while (i < text.size() && text[i] != ',' && text[i] != ']' &&
                           text[i] != '\n' && text[i] != ' ' && text[i] != '\t')
                        tok += text[i++];
                    val.arr.push_back(parse_scalar_token(tok, line));
                }
            }
        } else {
            std::string tok;
            while (i < text.size() && text[i] != '\n' && text[i] != '#' && text[i] != ' ' &&
                   text[i] != '\t')
                tok += text[i++];
            val = parse_scalar_token(tok, line);
        }
        if (!at_eol(i)) fail(line, "trailing characters after value for key '" + key + "'");
        if (cur->kv.count(key)) fail(line, "duplicate key '" + key + "'");
        cur->kv.emplace(std::move(key), std::move(val));
    }
    return doc;
}

TomlDoc TomlDoc::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace ietlab
