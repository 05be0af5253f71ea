#include "chmm/state_space.hpp"

#include <string>

namespace chmm {

StateSpace::StateSpace(int num_chains_, int states_per_chain_)
    : num_chains(num_chains_), states_per_chain(states_per_chain_) {
    if (num_chains < 1 || states_per_chain < 1) {
        throw ConfigError("StateSpace requires M >= 1 and N >= 1");
    }
    long long k = 1;
    for (int m = 0; m < num_chains; ++m) {
        k *= states_per_chain;
        if (k > (1 << 24)) {
            throw ConfigError("product state space too large: N^M exceeds 2^24");
        }
    }
    product_dim_ = static_cast<int>(k);
}

int encode_product_state(const std::vector<int>& chain_states, const StateSpace& space) {
    if (static_cast<int>(chain_states.size()) != space.num_chains) {
        throw DataError("encode_product_state: expected " + std::to_string(space.num_chains) +
                        " chain states, got " + std::to_string(chain_states.size()));
    }
    int index = 0;
    for (int m = 0; m < space.num_chains; ++m) {
        const int s = chain_states[m];
        if (s < 1 || s > space.states_per_chain) {
            throw DataError("encode_product_state: chain " + std::to_string(m + 1) +
                            " state " + std::to_string(s) + " outside 1.." +
                            std::to_string(space.states_per_chain));
        }
        index = index * space.states_per_chain + (s - 1);
    }
    return index;
}

std::vector<int> decode_product_state(int index, const StateSpace& space) {
    if (index < 0 || index >= space.product_dim()) {
        throw DataError("decode_product_state: index " + std::to_string(index) +
                        " outside 0..K-1");
    }
    std::vector<int> states(space.num_chains);
    for (int m = space.num_chains - 1; m >= 0; --m) {
        states[m] = index % space.states_per_chain + 1;
        index /= space.states_per_chain;
    }
    return states;
}

int chain_state_of(int index, int chain, const StateSpace& space) {
    int div = 1;
    for (int m = space.num_chains - 1; m > chain; --m) div *= space.states_per_chain;
    return (index / div) % space.states_per_chain;
}

} // namespace chmm
