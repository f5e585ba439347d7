#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "ledgerlab/bytes.hpp"
#include "ledgerlab/rng.hpp"

using namespace ledgerlab;

TEST_CASE("sha256 matches published test vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hex round-trips and rejects non-canonical input") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        Bytes b = rng.bytes(static_cast<size_t>(rng.below(64)));
        auto back = from_hex(to_hex(b));
        REQUIRE(back.has_value());
        CHECK(*back == b);
    }
    CHECK_FALSE(from_hex("abc").has_value());   // odd length
    CHECK_FALSE(from_hex("AB").has_value());    // uppercase is not canonical
    CHECK_FALSE(from_hex("zz").has_value());
    CHECK(from_hex("")->empty());
}

TEST_CASE("digest_from_hex enforces exact length") {
    const std::string h = sha256_hex("x");
    REQUIRE(digest_from_hex(h).has_value());
    CHECK(to_hex(*digest_from_hex(h)) == h);
    CHECK_FALSE(digest_from_hex(h.substr(0, 62)).has_value());
    CHECK_FALSE(digest_from_hex(h + "00").has_value());
}

TEST_CASE("rng streams are deterministic and forks are independent") {
    Rng a(123);
    Rng b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    Rng base(9);
    Rng f1 = base.fork("left");
    Rng f2 = base.fork("right");
    CHECK(f1.next() != f2.next());
    // Forking is a pure function of (label, state).
    CHECK(Rng(9).fork("left").next() == Rng(9).fork("left").next());
}

TEST_CASE("rng below stays inside the bound and covers it") {
    Rng rng(77);
    std::set<uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        uint64_t v = rng.below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);

    for (int i = 0; i < 200; ++i) {
        int64_t v = rng.range(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
    }
}
