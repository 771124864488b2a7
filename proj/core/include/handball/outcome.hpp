#pragma once

#include <string_view>

namespace handball {

/// Match result from the first-named team's perspective, in ordinal order.
enum class Outcome { win = 0, draw = 1, loss = 2 };

std::string_view to_string(Outcome outcome);

inline Outcome outcome_of(int goals_a, int goals_b) {
  return goals_a > goals_b ? Outcome::win : goals_a == goals_b ? Outcome::draw : Outcome::loss;
}

struct OutcomeProbs {
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;

  double operator[](Outcome o) const {
    return o == Outcome::win ? win : o == Outcome::draw ? draw : loss;
  }
  double sum() const { return win + draw + loss; }
};

}  // namespace handball
