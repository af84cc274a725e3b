"""Scenario description and its JSON file format.

Schema (version 1)::

    {
      "version": 1,
      "name": "...",                         # optional
      "seed": 42,                            # generator seed, metadata
      "area": {"width_m": 52, "height_m": 30, "side_m": 1.0},
      "obstacles": [[q, r], ...],
      "nodes": {"<node id>": [q, r], ...},
      "depots": {"<uav id>": <node id>, ...},
      "wind": {"kind": "pattern", "speed": 2.0, "blow_s": 30.0,
               "cycle_s": 40.0, "seed": 7}
            | {"kind": "trace", "rows": [[t_s, dx, dy], ...]}
            | {"kind": "none"},
      "wind_cap": 2.0,                       # optional; defaults per wind kind
      "craft": {"mass_kg": ..., ...}         # optional; default craft
    }

Node and UAV ids are integers (JSON object keys are their decimal strings).
"""

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

from .disturbance import NoWind, WindPattern, WindTrace
from .errors import ScenarioError
from .hexgrid import HexCoord, HexGrid
from .quadrotor import CraftParams, default_craft

SCHEMA_VERSION = 1

WindSource = Union[WindPattern, WindTrace, NoWind]


@dataclass
class Scenario:
    grid: HexGrid
    wind: WindSource
    wind_cap: float
    craft: CraftParams = field(default_factory=default_craft)
    seed: int = 0
    name: str = ""

    def to_dict(self) -> dict:
        g = self.grid
        if isinstance(self.wind, WindPattern):
            wind = {
                "kind": "pattern",
                "speed": self.wind.speed,
                "blow_s": self.wind.blow_s,
                "cycle_s": self.wind.cycle_s,
                "seed": self.wind.seed,
            }
        elif isinstance(self.wind, WindTrace):
            wind = {"kind": "trace", "rows": [list(r) for r in self.wind.rows]}
        else:
            wind = {"kind": "none"}
        return {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "seed": self.seed,
            "area": {"width_m": g.width_m, "height_m": g.height_m, "side_m": g.side_m},
            "obstacles": sorted([h.q, h.r] for h in g.obstacles),
            "nodes": {str(nid): [h.q, h.r] for nid, h in sorted(g.nodes.items())},
            "depots": {str(uav): nid for uav, nid in sorted(g.depots.items())},
            "wind": wind,
            "wind_cap": self.wind_cap,
            "craft": dataclasses.asdict(self.craft),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            if data.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
                raise ScenarioError(f"unsupported scenario version {data.get('version')}")
            area = data["area"]
            grid = HexGrid(
                width_m=float(area["width_m"]),
                height_m=float(area["height_m"]),
                side_m=float(area.get("side_m", 1.0)),
                obstacles=[HexCoord(int(q), int(r)) for q, r in data.get("obstacles", [])],
                nodes={int(k): HexCoord(int(v[0]), int(v[1])) for k, v in data["nodes"].items()},
                depots={int(k): int(v) for k, v in data["depots"].items()},
            )
            wdata = data.get("wind", {"kind": "none"})
            kind = wdata.get("kind", "none")
            wind: WindSource
            if kind == "pattern":
                wind = WindPattern(
                    speed=float(wdata["speed"]),
                    blow_s=float(wdata.get("blow_s", 30.0)),
                    cycle_s=float(wdata.get("cycle_s", 40.0)),
                    seed=int(wdata.get("seed", 0)),
                )
            elif kind == "trace":
                wind = WindTrace(rows=[tuple(r) for r in wdata["rows"]])
            elif kind == "none":
                wind = NoWind()
            else:
                raise ScenarioError(f"unknown wind kind {kind!r}")
            cap = float(data.get("wind_cap", wind.cap))
            craft = CraftParams(**data["craft"]) if "craft" in data else default_craft()
            return cls(
                grid=grid,
                wind=wind,
                wind_cap=cap,
                craft=craft,
                seed=int(data.get("seed", 0)),
                name=data.get("name", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed scenario: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
