#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "retsyn/dates.hpp"
#include "retsyn/io.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/sha256.hpp"
#include "retsyn/utf8.hpp"

#include <filesystem>

using namespace retsyn;

TEST_CASE("utf8 code point accounting") {
    CHECK(cp_len("") == 0);
    CHECK(cp_len("abc") == 3);
    CHECK(cp_len("公司") == 2);
    CHECK(cp_len("a公b司c") == 5);
    CHECK(encode_utf8(U'公') == "\xE5\x85\xAC");
    CHECK(cp_at("公司", 0) == U'公');
    CHECK(std::string(cp_prefix("公司情况", 2)) == "公司");

    // Lenient decoding: stray continuation bytes count as single code points.
    std::string broken = "a\x85\xACz";
    CHECK(cp_len(broken) == 4);
    auto offs = cp_offsets(broken);
    CHECK(offs.size() == 5);
    CHECK(offs.back() == broken.size());
}

TEST_CASE("cjk detection") {
    CHECK(count_cjk("钢铁行业") == 4);
    CHECK(count_cjk("abc123") == 0);
    CHECK(count_cjk("A股三季报") == 4);
    CHECK(is_cjk(U'钢'));
    CHECK_FALSE(is_cjk(U'A'));
    CHECK_FALSE(is_cjk(U'。'));
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 streaming matches one-shot") {
    std::string data(100000, 'x');
    Sha256 h;
    h.update(data.substr(0, 333));
    h.update(data.substr(333));
    CHECK(h.hex_digest() == sha256_hex(data));
}

TEST_CASE("dates parse and subtract") {
    auto date = parse_iso_date("2023-05-17");
    REQUIRE(date.has_value());
    CHECK(date->year == 2023);
    CHECK(days_from_civil({1970, 1, 1}) == 0);
    CHECK(days_from_civil({1970, 1, 2}) == 1);
    CHECK(days_from_civil({2000, 3, 1}) == 11017);
    CHECK(day_displacement("2022-01-08", "2022-01-01") == 7);
    CHECK(day_displacement("2021-12-31", "2022-01-01") == -1);

    CHECK_FALSE(parse_iso_date("2023-13-01"));
    CHECK_FALSE(parse_iso_date("2023-02-29"));  // not a leap year
    CHECK(parse_iso_date("2024-02-29"));
    CHECK(parse_iso_date("2023-05-17T10:00:00"));
    CHECK_FALSE(parse_iso_date("17/05/2023"));
}

TEST_CASE("splitmix is stable and sampling is order-free") {
    SplitMix a(7), b(7);
    for (int i = 0; i < 16; ++i) CHECK(a.next() == b.next());

    SplitMix r1(99), r2(99);
    auto s1 = sample_indices(100, 10, r1);
    auto s2 = sample_indices(100, 10, r2);
    CHECK(s1 == s2);
    CHECK(s1.size() == 10);
    auto all = sample_indices(5, 50, SplitMix(1));
    CHECK(all.size() == 5);
}

TEST_CASE("atomic write then read round-trip") {
    auto dir = std::filesystem::temp_directory_path() / "retsyn_io_test";
    std::filesystem::create_directories(dir);
    auto file = dir / "x.txt";
    atomic_write_file(file, "hello\n");
    CHECK(read_file(file) == "hello\n");
    CHECK_FALSE(std::filesystem::exists(dir / "x.txt.tmp"));
    atomic_write_file(file, "replaced");
    CHECK(read_file(file) == "replaced");
    std::filesystem::remove_all(dir);
}

TEST_CASE("fmt_fixed renders stable decimals") {
    CHECK(fmt_fixed(1.0, 2) == "1.00");
    CHECK(fmt_fixed(0.5, 4) == "0.5000");
    CHECK(fmt_fixed(37.175, 2) == "37.17");  // banker-free snprintf rounding
}
