#include "doctest.h"

#include "chmm/state_space.hpp"

using namespace chmm;

TEST_CASE("product state encoding matches the fixed state order") {
    StateSpace space(2, 2);
    CHECK(space.product_dim() == 4);
    CHECK(encode_product_state({1, 1}, space) == 0);
    CHECK(encode_product_state({1, 2}, space) == 1);
    CHECK(encode_product_state({2, 1}, space) == 2);
    CHECK(encode_product_state({2, 2}, space) == 3);
}

TEST_CASE("mixed-radix encoding, chain 1 most significant") {
    StateSpace space(3, 3);
    CHECK(encode_product_state({1, 2, 3}, space) == 5);
    CHECK(decode_product_state(5, space) == std::vector<int>{1, 2, 3});
}

TEST_CASE("out-of-range components are rejected") {
    StateSpace space(2, 2);
    CHECK_THROWS_AS(encode_product_state({0, 1}, space), DataError);
    CHECK_THROWS_AS(encode_product_state({1, 3}, space), DataError);
    CHECK_THROWS_AS(encode_product_state({1}, space), DataError);
    CHECK_THROWS_AS(decode_product_state(4, space), DataError);
    CHECK_THROWS_AS(decode_product_state(-1, space), DataError);
}

TEST_CASE("encode/decode bijection, exhaustive up to K = 81") {
    const std::pair<int, int> shapes[] = {{1, 1}, {1, 5}, {2, 2}, {2, 3},
                                          {3, 2}, {2, 9}, {4, 3}, {3, 4}};
    for (auto [m, n] : shapes) {
        StateSpace space(m, n);
        REQUIRE(space.product_dim() <= 81);
        for (int k = 0; k < space.product_dim(); ++k) {
            const auto states = decode_product_state(k, space);
            CHECK(encode_product_state(states, space) == k);
            for (int c = 0; c < m; ++c) {
                CHECK(chain_state_of(k, c, space) == states[c] - 1);
            }
        }
    }
}
