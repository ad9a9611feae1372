#pragma once

#include <optional>
#include <string>
#include <vector>

#include "firstreply/events.hpp"
#include "firstreply/matching.hpp"

namespace firstreply {

// Engagement risk ratio: the continued-engagement fraction of replied-to
// newcomers over that of non-replied newcomers.
struct ErrResult {
  std::string community;
  PostKind kind = PostKind::comment;
  double p_treated = 0.0;
  double p_control = 0.0;
  double err = 0.0;
  int64_t n_treated = 0;
  int64_t n_control = 0;
  bool undefined = false;  // p_control == 0; excluded from paired tests
};

ErrResult err_from_counts(int64_t engaged_treated, int64_t n_treated,
                          int64_t engaged_control, int64_t n_control);

// ERR over a matched pool: the treated arm is the treated side of each pair,
// the control arm the matched controls.
ErrResult err(const MatchedPairs& pairs, const std::vector<FirstPostEvent>& treated,
              const std::vector<FirstPostEvent>& control);

// ERR over unmatched arms (used by the synthetic-truth ledger).
ErrResult err(const std::vector<FirstPostEvent>& treated,
              const std::vector<FirstPostEvent>& control);

}  // namespace firstreply
