#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tdsvrg {

struct Transition {
    std::size_t s = 0;
    std::size_t s2 = 0;
    double r = 0.0;
};

// The balanced flag records whether the multiset of first states equals the
// multiset of second states; when it holds, the mean-path TD direction is an
// exact gradient splitting of f_d.
struct Dataset {
    std::vector<Transition> transitions;
    bool balanced = false;
    std::string source_mdp_id;

    std::size_t size() const { return transitions.size(); }
};

inline bool is_balanced(const std::vector<Transition>& transitions) {
    std::map<std::size_t, long> count;
    for (const Transition& t : transitions) {
        ++count[t.s];
        --count[t.s2];
    }
    for (const auto& [state, c] : count)
        if (c != 0) return false;
    return true;
}

inline Dataset make_dataset(std::vector<Transition> transitions, std::string source_id) {
    Dataset d;
    d.balanced = is_balanced(transitions);
    d.transitions = std::move(transitions);
    d.source_mdp_id = std::move(source_id);
    return d;
}

} // namespace tdsvrg
