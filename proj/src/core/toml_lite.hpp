#pragma once

/*
 * Minimal TOML subset: comments, [table] and [[table array]] headers,
 * key = value with scalar values (integer, float, string, bool) and flat
 * arrays.  No dotted keys, no inline tables, no datetimes.  Enough for
 * roof specifications and experiment configs, with strict errors on
 * anything outside the subset.
 */

#include <map>
#include <string>
#include <vector>

namespace ietlab {

struct TomlValue {
    enum class Kind { Int, Float, Str, Bool, Arr };
    Kind kind = Kind::Int;
    long long i = 0;
    double f = 0.0;
    std::string s;
    bool b = false;
    std::vector<TomlValue> arr;

    /* numeric coercion: Int and Float both read as double */
    double as_number() const;
    long long as_int() const;
    const std::string& as_str() const;
    bool as_bool() const;
    std::vector<double> as_number_array() const;
};

struct TomlTable {
    std::map<std::string, TomlValue> kv;
    bool has(const std::string& k) const { return kv.count(k) != 0; }
    const TomlValue& at(const std::string& k) const;
    double number_or(const std::string& k, double dflt) const;
    long long int_or(const std::string& k, long long dflt) const;
    std::string str_or(const std::string& k, const std::string& dflt) const;
    bool bool_or(const std::string& k, bool dflt) const;
};

struct TomlDoc {
    TomlTable root;
    std::map<std::string, TomlTable> tables;
    std::map<std::string, std::vector<TomlTable>> table_arrays;

    bool has_table(const std::string& name) const { return tables.count(name) != 0; }
    const TomlTable& table(const std::string& name) const;

    static TomlDoc parse(const std::string& text);
    static TomlDoc parse_file(const std::string& path);
};

}  // namespace ietlab
