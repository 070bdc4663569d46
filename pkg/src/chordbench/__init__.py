"""Chord algorithm for convex Pareto curves, with baselines and benchmarks."""

from .geometry import (HAUSDORFF, HORIZONTAL, INF, METRICS, RATIO, Point, Segment,
                       Triangle, chord_split, coverage_error, lower_envelope,
                       metric_to_segment, ratio_distance, triangle_area)
from .oracle import (AdversaryOracle, AdversaryState, DeltaComb, ExactComb, Instance,
                     PrefixFamily, comb_delta, comb_exact)
from .chord import ChordResult, ProtocolError, run_chord, trace_stats, verify_eps_cp
from .optimum import OptResult, opt_exact, opt_greedy, performance_ratio
from .instances import gen_avg_lb, gen_balanced, gen_ig, gen_lb, gen_ppp

__version__ = "0.1.0"
