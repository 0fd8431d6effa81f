#pragma once

#include <random>
#include <string>
#include <vector>

#include "qshield/qddc.hpp"

namespace qshield::testutil {

// Behaviour over {r,p,q} used across the monitor tests, together with the
// expected prefix truth of phi_until(3) at each position.
inline Trace rpq_trace() {
    VarSet vars({"r", "p", "q"});
    const int r[] = {0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    const int p[] = {0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    const int q[] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    Trace t{vars, {}};
    for (int i = 0; i < 21; ++i)
        t.letters.push_back(static_cast<LetterIndex>((r[i] << 2) | (p[i] << 1) | q[i]));
    return t;
}

inline std::vector<bool> rpq_phi_until3_row() {
    const int v[] = {1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    return std::vector<bool>(std::begin(v), std::end(v));
}

inline PropFormula random_prop(std::mt19937_64& rng, const std::vector<std::string>& vars,
                               int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 2);
    switch (pick(rng)) {
        case 0: return PropFormula::var(vars[rng() % vars.size()]);
        case 1: return PropFormula::tt();
        case 2: return PropFormula::negate(random_prop(rng, vars, depth - 1));
        case 3: return PropFormula::conj(random_prop(rng, vars, depth - 1),
                                         random_prop(rng, vars, depth - 1));
        case 4: return PropFormula::disj(random_prop(rng, vars, depth - 1),
                                         random_prop(rng, vars, depth - 1));
        case 5: return PropFormula::implies(random_prop(rng, vars, depth - 1),
                                            random_prop(rng, vars, depth - 1));
        default: return PropFormula::iff(random_prop(rng, vars, depth - 1),
                                         random_prop(rng, vars, depth - 1));
    }
}

// Random formula over the given variables, mixing core and sugar nodes.
// At most one quantifier per formula keeps the brute-force oracle fast.
inline QddcFormula random_formula(std::mt19937_64& rng, int depth,
                                  const std::vector<std::string>& vars,
                                  bool allow_quant = true) {
    auto prop = [&] { return random_prop(rng, vars, 2); };
    std::uniform_int_distribution<int> bound_dist(0, 3);
    if (depth <= 0) {
        switch (rng() % 7) {
            case 0: return QddcFormula::point(prop());
            case 1: return QddcFormula::all_but_last(prop());
            case 2: return QddcFormula::all(prop());
            case 3: return QddcFormula::pt();
            case 4: return QddcFormula::slen_cmp(static_cast<Cmp>(rng() % 5),
                                                 static_cast<std::uint64_t>(bound_dist(rng)));
            case 5: return QddcFormula::scount_cmp(prop(), static_cast<Cmp>(rng() % 5),
                                                   static_cast<std::uint64_t>(bound_dist(rng)));
            default: return QddcFormula::sdur_cmp(prop(), static_cast<Cmp>(rng() % 5),
                                                  static_cast<std::uint64_t>(bound_dist(rng)));
        }
    }
    switch (rng() % 12) {
        case 0: return QddcFormula::negate(random_formula(rng, depth - 1, vars, allow_quant));
        case 1: return QddcFormula::chop(random_formula(rng, depth - 1, vars, allow_quant),
                                         random_formula(rng, depth - 1, vars, allow_quant));
        case 2: return QddcFormula::conj(random_formula(rng, depth - 1, vars, allow_quant),
                                         random_formula(rng, depth - 1, vars, allow_quant));
        case 3: return QddcFormula::disj(random_formula(rng, depth - 1, vars, allow_quant),
                                         random_formula(rng, depth - 1, vars, allow_quant));
        case 4: return QddcFormula::box(random_formula(rng, depth - 1, vars, allow_quant));
        case 5: return QddcFormula::diamond(random_formula(rng, depth - 1, vars, allow_quant));
        case 6: return QddcFormula::pref(random_formula(rng, depth - 1, vars, allow_quant));
        case 7: return QddcFormula::implies(random_formula(rng, depth - 1, vars, allow_quant),
                                            random_formula(rng, depth - 1, vars, allow_quant));
        case 8: return QddcFormula::iff(random_formula(rng, depth - 1, vars, allow_quant),
                                        random_formula(rng, depth - 1, vars, allow_quant));
        case 9:
        case 10:
            if (allow_quant) {
                std::string v = (rng() % 2) ? vars[rng() % vars.size()] : std::string("w");
                QddcFormula body = random_formula(rng, depth - 1, vars, false);
                return (rng() % 2) ? QddcFormula::exists(v, body) : QddcFormula::forall(v, body);
            }
            [[fallthrough]];
        default: return random_formula(rng, 0, vars, allow_quant);
    }
}

// Every trace over `vars` of length 1..max_len.
inline std::vector<Trace> all_traces(const VarSet& vars, std::size_t max_len) {
    std::vector<Trace> out;
    std::vector<LetterIndex> current;
    auto rec = [&](auto&& self, std::size_t remaining) -> void {
        if (!current.empty()) out.push_back(Trace{vars, current});
        if (remaining == 0) return;
        for (LetterIndex l = 0; l < vars.letter_count(); ++l) {
            current.push_back(l);
            self(self, remaining - 1);
            current.pop_back();
        }
    };
    rec(rec, max_len);
    return out;
}

// Random trace of the given length.
inline Trace random_trace(std::mt19937_64& rng, const VarSet& vars, std::size_t len) {
    Trace t{vars, {}};
    for (std::size_t i = 0; i < len; ++i)
        t.letters.push_back(static_cast<LetterIndex>(rng() % vars.letter_count()));
    return t;
}

} // namespace qshield::testutil
