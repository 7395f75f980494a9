/*
 * Serialization layers: the TOML subset parser against hand-checked
 * documents and strict error cases, roof specification round-trips,
 * exact IET JSON round-trips, and the SHA-256 core against published
 * test vectors.
 */

#include "doctest.h"

#include "core/iet.hpp"
#include "core/logflow.hpp"
#include "core/sha256.hpp"
#include "core/toml_lite.hpp"
#include "helpers.hpp"

using namespace ietlab;
using ietlab_test::golden_iet;

TEST_CASE("toml subset parses tables, arrays of tables, and scalars") {
    const char* text =
        "top = 3\n"
        "# comment line\n"
        "[alpha]\n"
        "x = 1.5            # trailing comment\n"
        "name = \"hello world\"\n"
        "flag = true\n"
        "items = [1, 2.5, 3]\n"
        "neg = -0x10\n"
        "\n"
        "[[pair]]\n"
        "z = 0.25\n"
        "[[pair]]\n"
        "z = 0.75\n";
    TomlDoc doc = TomlDoc::parse(text);
    CHECK(doc.root.at("top").as_int() == 3);
    REQUIRE(doc.has_table("alpha"));
    const TomlTable& a = doc.table("alpha");
    CHECK(a.at("x").as_number() == 1.5);
    CHECK(a.at("name").as_str() == "hello world");
    CHECK(a.at("flag").as_bool());
    std::vector<double> items = a.at("items").as_number_array();
    REQUIRE(items.size() == 3);
    CHECK(items[1] == 2.5);
    CHECK(a.at("neg").as_int() == -16);
    REQUIRE(doc.table_arrays.count("pair") == 1);
    REQUIRE(doc.table_arrays.at("pair").size() == 2);
    CHECK(doc.table_arrays.at("pair")[1].at("z").as_number() == 0.75);
    // defaults
    CHECK(a.number_or("missing", 7.5) == 7.5);
    CHECK(a.int_or("missing", 9) == 9);
    CHECK(a.str_or("missing", "d") == "d");
    CHECK(a.bool_or("missing", true));
}

TEST_CASE("toml subset rejects what it does not support") {
    CHECK_THROWS_AS(TomlDoc::parse("a.b = 1\n"), IoError);            // dotted key
    CHECK_THROWS_AS(TomlDoc::parse("a = {x = 1}\n"), IoError);        // inline table
    CHECK_THROWS_AS(TomlDoc::parse("a = 1 2\n"), IoError);            // trailing junk
    CHECK_THROWS_AS(TomlDoc::parse("[t\nx = 1\n"), IoError);          // open header
    CHECK_THROWS_AS(TomlDoc::parse("x = \"unterminated\n"), IoError); // open string
    CHECK_THROWS_AS(TomlDoc::parse("= 3\n"), IoError);                // missing key
    CHECK_THROWS_AS(TomlDoc::parse("[a]\nx = 1\n[a]\ny = 2\n"), IoError);  // dup table
    // type mismatches raise on access
    TomlDoc doc = TomlDoc::parse("x = 3\n");
    CHECK_THROWS_AS(doc.root.at("x").as_str(), IoError);
    CHECK_THROWS_AS(doc.root.at("missing"), IoError);
}

TEST_CASE("roof specifications round-trip through toml") {
    mpfr_prec_t p = 128;
    RoofSpec spec = RoofSpec::single_pair(1.0, 0.5, p);
    spec.cos_coefs = {0.25, -0.125};
    spec.sin_coefs = {0.5};
    std::string text = spec.to_toml();
    RoofSpec back = RoofSpec::from_toml(text, p);
    REQUIRE(back.right.size() == spec.right.size());
    REQUIRE(back.left.size() == spec.left.size());
    for (size_t i = 0; i < spec.right.size(); ++i) {
        CHECK(back.right[i].z == spec.right[i].z);
        CHECK(back.right[i].C == spec.right[i].C);
    }
    for (size_t i = 0; i < spec.left.size(); ++i) {
        CHECK(back.left[i].z == spec.left[i].z);
        CHECK(back.left[i].C == spec.left[i].C);
    }
    CHECK(back.cos_coefs == spec.cos_coefs);
    CHECK(back.sin_coefs == spec.sin_coefs);
    // the round-tripped roof is the same function
    Roof r1(spec, p), r2(back, p);
    CHECK(r1.normalization() == r2.normalization());
    Real x(0.37, p);
    CHECK(r1.value(x) == r2.value(x));

    // quadruple preset round-trips too
    RoofSpec ham = RoofSpec::hamiltonian_quadruples(2, p);
    RoofSpec hback = RoofSpec::from_toml(ham.to_toml(), p);
    REQUIRE(hback.right.size() == ham.right.size());
    for (size_t i = 0; i < ham.right.size(); ++i) CHECK(hback.right[i].z == ham.right[i].z);
}

TEST_CASE("roof spec validation") {
    mpfr_prec_t p = 96;
    CHECK_THROWS_AS(RoofSpec::from_toml("[[right]]\nz = 0.25\nC = -1.0\n", p), UsageError);
    CHECK_THROWS_AS(RoofSpec::from_toml("[[right]]\nz = 1.5\nC = 1.0\n", p), UsageError);
    CHECK_THROWS_AS(Roof(RoofSpec{}, p), UsageError);  // no singularities at all
}

TEST_CASE("iet json round-trip is bit exact") {
    Iet T = golden_iet(128);
    std::string js = T.to_json();
    Iet back = Iet::from_json(js);
    CHECK(back.d() == T.d());
    CHECK(back.precision_bits() == T.precision_bits());
    CHECK(back.perm().str() == T.perm().str());
    for (int j = 0; j < T.d(); ++j)
        CHECK(back.lengths()[(size_t)j] == T.lengths()[(size_t)j]);
    // a second trip is byte-identical
    CHECK(back.to_json() == js);

    Iet S = sample_iet(Permutation::parse("5 3 1 4 2"), 1234, 192);
    Iet S2 = Iet::from_json(S.to_json());
    for (int j = 0; j < S.d(); ++j)
        CHECK(S2.lengths()[(size_t)j] == S.lengths()[(size_t)j]);

    CHECK_THROWS_AS(Iet::from_json("{\"perm\":"), IoError);
    CHECK_THROWS_AS(Iet::from_json("not json"), IoError);
}

TEST_CASE("sha256 matches published vectors") {
    CHECK(sha256_hex(std::string()) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex(std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // one-million 'a' vector exercises multi-block streaming
    std::string a(1000000, 'a');
    CHECK(sha256_hex(a) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}
