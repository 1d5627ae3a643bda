#include "heisenbn/factor.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace heisenbn {

Factor::Factor(std::vector<std::size_t> vars, std::vector<std::size_t> cards,
               std::vector<double> values)
    : vars_(std::move(vars)), cards_(std::move(cards)), values_(std::move(values)) {
  assert(std::is_sorted(vars_.begin(), vars_.end()));
  assert(vars_.size() == cards_.size());
}

bool Factor::contains(std::size_t var) const noexcept {
  return std::binary_search(vars_.begin(), vars_.end(), var);
}

Factor Factor::operator*(const Factor& other) const {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < vars_.size() || j < other.vars_.size()) {
    if (j == other.vars_.size() || (i < vars_.size() && vars_[i] < other.vars_[j])) {
      vars.push_back(vars_[i]);
      cards.push_back(cards_[i++]);
    } else if (i == vars_.size() || other.vars_[j] < vars_[i]) {
      vars.push_back(other.vars_[j]);
      cards.push_back(other.cards_[j++]);
    } else {
      vars.push_back(vars_[i]);
      cards.push_back(cards_[i]);
      ++i;
      ++j;
    }
  }

  // Per result variable, the stride of that variable in each operand (0 when
  // absent).
  const std::size_t n = vars.size();
  std::vector<std::size_t> stride_a(n, 0);
  std::vector<std::size_t> stride_b(n, 0);
  {
    std::size_t s = 1;
    for (std::size_t k = vars_.size(); k-- > 0;) {
      auto pos = std::lower_bound(vars.begin(), vars.end(), vars_[k]) - vars.begin();
      stride_a[pos] = s;
      s *= cards_[k];
    }
    s = 1;
    for (std::size_t k = other.vars_.size(); k-- > 0;) {
      auto pos = std::lower_bound(vars.begin(), vars.end(), other.vars_[k]) - vars.begin();
      stride_b[pos] = s;
      s *= other.cards_[k];
    }
  }

  const std::size_t total =
      std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
  std::vector<double> values(total);
  std::vector<std::size_t> digit(n, 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    values[idx] = values_[ia] * other.values_[ib];
    for (std::size_t k = n; k-- > 0;) {
      if (++digit[k] < cards[k]) {
        ia += stride_a[k];
        ib += stride_b[k];
        break;
      }
      digit[k] = 0;
      ia -= stride_a[k] * (cards[k] - 1);
      ib -= stride_b[k] * (cards[k] - 1);
    }
  }
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

Factor Factor::sum_out(std::size_t var) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) return *this;
  const auto pos = static_cast<std::size_t>(it - vars_.begin());
  std::size_t outer = 1;
  for (std::size_t k = 0; k < pos; ++k) outer *= cards_[k];
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < cards_.size(); ++k) inner *= cards_[k];
  const std::size_t card = cards_[pos];

  std::vector<double> values(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < card; ++s) {
      const double* src = values_.data() + (o * card + s) * inner;
      double* dst = values.data() + o * inner;
      for (std::size_t in = 0; in < inner; ++in) dst[in] += src[in];
    }
  }
  auto vars = vars_;
  auto cards = cards_;
  vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(pos));
  cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(pos));
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

double Factor::total() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

}  // namespace heisenbn
