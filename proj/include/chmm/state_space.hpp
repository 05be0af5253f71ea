#pragma once

#include <vector>

#include "chmm/errors.hpp"

namespace chmm {

/// Product state space of M coupled chains with N states each.
///
/// Product-state indices use mixed-radix encoding with chain 1 most
/// significant, i.e. for M = N = 2 the order is (1,1),(1,2),(2,1),(2,2).
/// Chain states are 1-based in all user-facing I/O, 0-based internally.
struct StateSpace {
    StateSpace() = default;
    StateSpace(int num_chains, int states_per_chain);

    int num_chains = 1;       // M
    int states_per_chain = 1; // N

    int product_dim() const { return product_dim_; } // K = N^M

private:
    int product_dim_ = 1;
};

/// Mixed-radix encoding of a 1-based chain-state vector. Throws DataError
/// if a component lies outside 1..N.
int encode_product_state(const std::vector<int>& chain_states, const StateSpace& space);

/// Inverse of encode_product_state; returns 1-based chain states.
std::vector<int> decode_product_state(int index, const StateSpace& space);

/// 0-based state of `chain` (0-based) within product state `index`.
int chain_state_of(int index, int chain, const StateSpace& space);

} // namespace chmm
