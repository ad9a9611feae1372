#include "firstreply/stats.hpp"

#include "firstreply/errors.hpp"

namespace firstreply {

ErrResult err_from_counts(int64_t engaged_treated, int64_t n_treated,
                          int64_t engaged_control, int64_t n_control) {
  if (n_treated < 1 || n_control < 1) {
    throw DataError("err: both arms need at least one event");
  }
  ErrResult r;
  r.n_treated = n_treated;
  r.n_control = n_control;
  r.p_treated = static_cast<double>(engaged_treated) / static_cast<double>(n_treated);
  r.p_control = static_cast<double>(engaged_control) / static_cast<double>(n_control);
  if (r.p_control == 0.0) {
    r.undefined = true;
    r.err = 0.0;
  } else {
    r.err = r.p_treated / r.p_control;
  }
  return r;
}

namespace {
int64_t engaged_count(const std::vector<FirstPostEvent>& events) {
  int64_t n = 0;
  for (const auto& ev : events) n += ev.engaged ? 1 : 0;
  return n;
}
}  // namespace

ErrResult err(const MatchedPairs& pairs, const std::vector<FirstPostEvent>& treated,
              const std::vector<FirstPostEvent>& control) {
  int64_t engaged_t = 0, engaged_c = 0;
  for (const auto& pair : pairs.pairs) {
    engaged_t += treated[pair.treated_index].engaged ? 1 : 0;
    engaged_c += control[pair.control_index].engaged ? 1 : 0;
  }
  auto n = static_cast<int64_t>(pairs.pairs.size());
  ErrResult r = err_from_counts(engaged_t, n, engaged_c, n);
  if (!treated.empty()) {
    r.community = treated.front().community;
    r.kind = treated.front().kind;
  }
  return r;
}

ErrResult err(const std::vector<FirstPostEvent>& treated,
              const std::vector<FirstPostEvent>& control) {
  ErrResult r = err_from_counts(engaged_count(treated), static_cast<int64_t>(treated.size()),
                                engaged_count(control), static_cast<int64_t>(control.size()));
  if (!treated.empty()) {
    r.community = treated.front().community;
    r.kind = treated.front().kind;
  }
  return r;
}

}  // namespace firstreply
