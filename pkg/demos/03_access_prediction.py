"""Predict a file's next access from its cumulative access history.

The predictor extrapolates the polynomial through the trailing window of
(time, cumulative count) samples to the expected next access time (last
sample plus the mean interval).  Linear histories extrapolate the line,
curved ones follow the curve, and a long flat tail pulls the forecast down
to zero growth.
"""

from racksim import AccessHistory, AccessSample, average_interval, lagrange_eval, predict_next


def history_from(pairs):
    h = AccessHistory(file_id=0)
    for t, c in pairs:
        h.append(AccessSample(t, c))
    return h


# Interpolation itself: four samples of y = x^2 recover the parabola exactly.
square = [(0, 0), (1, 1), (2, 4), (3, 9)]
print("interpolating y=x^2 at x=5:", lagrange_eval(square, 5))

# A steadily accessed file: 5 accesses every 10 seconds.
steady = history_from([(0, 0), (10, 5), (20, 10), (30, 15)])
print(f"\nsteady file, mean interval {average_interval(steady)} s")
p = predict_next(steady)
print(f"  next access ~t={p.t_next}: cumulative count {p.count_next}"
      f" (window of {p.window_used} samples)")

# A file heating up: the quadratic trend carries into the forecast.
heating = history_from([(0, 0), (60, 4), (120, 16), (180, 36)])
p = predict_next(heating)
print(f"heating file: predicted cumulative {p.count_next:.1f} at t={p.t_next}")

# A file gone cold: growth flattens, and the forecast stops growing too
# (negative extrapolations clamp to zero, counts cannot shrink).
cold = history_from([(0, 0), (60, 20), (120, 20), (180, 20), (240, 20)])
p = predict_next(cold)
print(f"cold file: predicted cumulative {p.count_next:.1f} at t={p.t_next}"
      f" (currently 20)")
