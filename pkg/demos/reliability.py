"""
Flagging regions where a pooled R may mislead
=============================================

Few recent deaths, or cases concentrated in a handful of sub-areas, make a
single regional R less meaningful. Each region gets a 0-3 score.
"""

from metapool import RegionSignal, ReliabilityConfig, death_proxy, heterogeneity, reliability_score

regions = [
    RegionSignal("steady", (14, 12, 15, 11, 13, 16, 12, 14, 13, 15), (210, 190, 230, 205, 220)),
    RegionSignal("patchy", (14, 12, 15, 11, 13, 16, 12, 14, 13, 15), (900, 15, 20, 10, 30)),
    RegionSignal("quiet", (1, 0, 2, 1, 0, 0, 1, 1, 0, 2), (40, 35, 50, 45, 30)),
    RegionSignal("sparse", (0, 0, 1, 0, 0, 0, 1, 0, 0, 0), (0, 0, 0, 12, 0)),
]

print(f"{'region':<8} {'deaths/day':>10} {'case CV':>8}  score")
for sig in regions:
    print(f"{sig.region_id:<8} {death_proxy(sig.daily_deaths):10.1f} "
          f"{heterogeneity(sig.subarea_cases):8.2f}  {reliability_score(sig)}")

# thresholds and the score table are configurable
strict = ReliabilityConfig(death_thresholds=(5, 20))
print("\nwith death thresholds (5, 20):",
      {s.region_id: reliability_score(s, strict) for s in regions})
