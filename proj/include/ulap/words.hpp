#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "ulap/errors.hpp"
#include "ulap/rational.hpp"

// Reduced words in a free group of rank g.  Letters are nonzero integers:
// +i is generator i (1-based), -i its inverse.  A word is reduced when no
// letter is followed by its inverse; the number of reduced words of length
// l >= 1 is 2g (2g-1)^(l-1).

namespace ulap {

using Letter = int;

class Word {
 public:
  Word() = default;

  static Word from_letters(const std::vector<Letter>& letters) {
    Word w;
    for (Letter l : letters) w.push(l);
    return w;
  }

  // Appends a letter, cancelling against the current last letter if inverse.
  void push(Letter l) {
    if (l == 0) throw PreconditionError("zero letter in word");
    if (!ls_.empty() && ls_.back() == -l) {
      ls_.pop_back();
    } else {
      ls_.push_back(l);
    }
  }

  Word inverse() const {
    Word w;
    for (auto it = ls_.rbegin(); it != ls_.rend(); ++it) w.ls_.push_back(-*it);
    return w;
  }

  Word concat(const Word& o) const {
    Word w = *this;
    for (Letter l : o.ls_) w.push(l);
    return w;
  }

  std::size_t length() const { return ls_.size(); }
  bool empty() const { return ls_.empty(); }
  const std::vector<Letter>& letters() const { return ls_; }

  bool operator==(const Word& o) const { return ls_ == o.ls_; }
  bool operator!=(const Word& o) const { return !(*this == o); }

  std::string str() const {
    if (ls_.empty()) return "e";
    std::string out;
    for (std::size_t i = 0; i < ls_.size(); ++i) {
      if (i) out += ".";
      out += (ls_[i] > 0 ? "g" : "G") + std::to_string(std::abs(ls_[i]));
    }
    return out;
  }

 private:
  std::vector<Letter> ls_;
};

// Number of reduced words of exactly length l.
inline Integer reduced_word_count(int genus, std::size_t l) {
  if (genus < 1) throw ConfigError("genus must be at least 1");
  if (l == 0) return Integer(1);
  return Integer(2 * genus) * pow_int(Integer(2 * genus - 1),
                                      static_cast<unsigned long>(l - 1));
}

// All reduced words of length 0..l_max, grouped by length.  The budget caps
// the total count before any allocation happens.
inline std::vector<std::vector<Word>> enumerate_words(int genus, std::size_t l_max,
                                                      std::size_t budget = 2000000) {
  if (genus < 1) throw ConfigError("genus must be at least 1");
  Integer total(0);
  for (std::size_t l = 0; l <= l_max; ++l) total += reduced_word_count(genus, l);
  if (total > static_cast<unsigned long>(budget)) {
    throw BudgetError("word enumeration needs " + total.get_str() +
                      " words, budget is " + std::to_string(budget));
  }
  std::vector<std::vector<Word>> by_length(l_max + 1);
  by_length[0].push_back(Word());
  for (std::size_t l = 1; l <= l_max; ++l) {
    for (const Word& w : by_length[l - 1]) {
      const Letter last = w.letters().empty() ? 0 : w.letters().back();
      for (int i = 1; i <= genus; ++i) {
        for (Letter cand : {Letter(i), Letter(-i)}) {
          if (cand == -last) continue;
          Word next = w;
          next.push(cand);
          by_length[l].push_back(std::move(next));
        }
      }
    }
    if (by_length[l].size() !=
        reduced_word_count(genus, l).get_ui()) {
      throw PreconditionError("word enumeration miscount at length " +
                              std::to_string(l));
    }
  }
  return by_length;
}

}  // namespace ulap
