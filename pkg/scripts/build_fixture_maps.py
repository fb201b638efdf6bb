#!/usr/bin/env python3
"""Regenerate the bundled OpenDRIVE fixture maps in src/scenegen/maps/.

Three maps ship with the package:

* crossroads — a four-arm junction with mixed lane kinds, signals, and
  objects, plus three satellite straights; rich enough for every showcase
  prompt.
* ranking — five junction approaches A..E (road ids 1..5) whose turn options,
  lane kinds, and lane counts differ exactly as the golden scoring table
  expects, each with its own exit roads.
* parade — twelve identical straights used by the diversity experiment.
"""

from __future__ import annotations

import math
from pathlib import Path

MAPS_DIR = Path(__file__).resolve().parent.parent / "src" / "scenegen" / "maps"

PI = math.pi
HALF_PI = math.pi / 2.0

SIGNAL_CODES = {"traffic light": "1000001", "stop sign": "206", "yield sign": "205"}


def lane_xml(lane_id: int, kind: str, width: float) -> str:
    return f'    <lane id="{lane_id}" type="{kind}"><width a="{width}"/></lane>'


def road_xml(
    rid: int,
    x: float,
    y: float,
    hdg: float,
    length: float,
    right: list[tuple[str, float]],
    left: list[tuple[str, float]] | None = None,
    signals: list[str] | None = None,
    objects: list[str] | None = None,
    successor_junction: int | None = None,
    predecessor_junction: int | None = None,
) -> str:
    links = []
    if successor_junction is not None:
        links.append(f'   <successor elementType="junction" elementId="{successor_junction}"/>')
    if predecessor_junction is not None:
        links.append(f'   <predecessor elementType="junction" elementId="{predecessor_junction}"/>')
    link_block = "  <link>\n" + "\n".join(links) + "\n  </link>\n" if links else ""

    left_lanes = ""
    if left:
        rows = "\n".join(lane_xml(i + 1, kind, width) for i, (kind, width) in enumerate(left))
        left_lanes = f"   <left>\n{rows}\n   </left>\n"
    right_rows = "\n".join(lane_xml(-(i + 1), kind, width) for i, (kind, width) in enumerate(right))

    signal_block = ""
    if signals:
        rows = "\n".join(
            f'   <signal id="{rid}{k}" type="{SIGNAL_CODES[s]}" name="{s}"/>'
            for k, s in enumerate(signals)
        )
        signal_block = f"  <signals>\n{rows}\n  </signals>\n"
    object_block = ""
    if objects:
        rows = "\n".join(
            f'   <object id="{rid}{k}" name="{o}"/>' for k, o in enumerate(objects)
        )
        object_block = f"  <objects>\n{rows}\n  </objects>\n"

    return (
        f' <road id="{rid}" length="{length}" junction="-1">\n'
        f"{link_block}"
        f'  <planView>\n'
        f'   <geometry s="0.0" x="{x}" y="{y}" hdg="{hdg}" length="{length}"><line/></geometry>\n'
        f"  </planView>\n"
        f"  <lanes>\n"
        f'   <laneSection s="0.0">\n'
        f"{left_lanes}"
        f'   <center><lane id="0" type="none"/></center>\n'
        f"   <right>\n{right_rows}\n   </right>\n"
        f"   </laneSection>\n"
        f"  </lanes>\n"
        f"{signal_block}"
        f"{object_block}"
        f" </road>\n"
    )


def connection_xml(cid: int, incoming: int, connecting: int, contact: str,
                   lane_from: int, lane_to: int, extra: list[tuple[int, int]] | None = None) -> str:
    pairs = [(lane_from, lane_to)] + list(extra or ())
    links = "\n".join(f'   <laneLink from="{f}" to="{t}"/>' for f, t in pairs)
    return (
        f'  <connection id="{cid}" incomingRoad="{incoming}" connectingRoad="{connecting}" '
        f'contactPoint="{contact}">\n'
        f"{links}\n"
        f"  </connection>\n"
    )


def junction_xml(jid: int, connections: list[str]) -> str:
    return f' <junction id="{jid}">\n' + "".join(connections) + " </junction>\n"


def document(name: str, body: str) -> str:
    return (
        '<?xml version="1.0" standalone="yes"?>\n'
        "<OpenDRIVE>\n"
        f' <header revMajor="1" revMinor="4" name="{name}"/>\n'
        f"{body}"
        "</OpenDRIVE>\n"
    )


def build_crossroads() -> str:
    driving = ("driving", 3.5)
    sidewalk = ("sidewalk", 2.0)
    shoulder = ("shoulder", 2.5)
    body = ""
    # Arms point at the junction centre; right lanes approach, left lanes exit.
    body += road_xml(
        10, 0.0, -80.0, HALF_PI, 60.0,
        right=[driving, driving, sidewalk],
        left=[driving, driving, sidewalk],
        signals=["traffic light"],
        objects=["simple crosswalk", "stop line"],
        successor_junction=100,
    )
    body += road_xml(
        11, 80.0, 0.0, PI, 60.0,
        right=[driving, shoulder],
        left=[driving, driving],
        signals=["stop sign"],
        objects=["stop sign on road"],
        successor_junction=100,
    )
    body += road_xml(
        12, 0.0, 80.0, -HALF_PI, 60.0,
        right=[driving, driving, driving, sidewalk],
        left=[driving, driving, sidewalk],
        signals=["yield sign"],
        objects=["ladder crosswalk"],
        successor_junction=100,
    )
    body += road_xml(
        13, -80.0, 0.0, 0.0, 60.0,
        right=[driving, driving, shoulder, sidewalk],
        left=[driving, driving, sidewalk],
        successor_junction=100,
    )
    body += road_xml(20, 150.0, -150.0, HALF_PI, 120.0,
                     right=[driving, driving, driving, shoulder, sidewalk])
    body += road_xml(21, 250.0, -150.0, HALF_PI, 120.0,
                     right=[driving, driving, driving],
                     objects=["speed sign of 60"])
    body += road_xml(22, 350.0, -150.0, HALF_PI, 120.0,
                     right=[driving, sidewalk],
                     objects=["solid single white crosswalk"])

    # Every approach fans out to the other three arms' exit directions; the
    # straight movement keeps parallel driving lanes parallel.
    exits = {10: {"left": 13, "straight": 12, "right": 11},
             11: {"left": 10, "straight": 13, "right": 12},
             12: {"left": 11, "straight": 10, "right": 13},
             13: {"left": 12, "straight": 11, "right": 10}}
    driving_counts = {10: 2, 11: 1, 12: 3, 13: 2}
    exit_counts = {10: 2, 11: 2, 12: 2, 13: 2}
    connections = []
    cid = 0
    for incoming in (10, 11, 12, 13):
        for turn, target in exits[incoming].items():
            extra = None
            if turn == "straight":
                lanes = min(driving_counts[incoming], exit_counts[target])
                extra = [(-k, k) for k in range(2, lanes + 1)]
            connections.append(connection_xml(cid, incoming, target, "end", -1, 1, extra))
            cid += 1
    body += junction_xml(100, connections)
    return document("crossroads", body)


def build_ranking() -> str:
    driving = ("driving", 3.5)
    shoulder = ("shoulder", 2.5)
    body = ""
    # Candidate A: all three turn options, a shoulder, three driving lanes.
    body += road_xml(1, 0.0, -70.0, HALF_PI, 60.0,
                     right=[driving, driving, driving, shoulder],
                     objects=["stop line"], successor_junction=900)
    body += road_xml(101, -10.0, 0.0, PI, 50.0, right=[driving], left=[driving],
                     successor_junction=901, predecessor_junction=900)
    body += road_xml(102, 0.0, 10.0, HALF_PI, 50.0, right=[driving],
                     predecessor_junction=900)
    body += road_xml(103, 10.0, 0.0, 0.0, 50.0, right=[driving],
                     predecessor_junction=900)
    body += road_xml(104, -70.0, 0.0, PI, 30.0, right=[driving],
                     predecessor_junction=901)
    body += junction_xml(900, [
        connection_xml(0, 1, 101, "start", -1, -1),
        connection_xml(1, 1, 102, "start", -1, -1),
        connection_xml(2, 1, 103, "start", -1, -1),
        connection_xml(3, 101, 102, "start", 1, -1),
    ])
    body += junction_xml(901, [connection_xml(0, 101, 104, "start", -1, -1)])

    # Candidate B: right + straight, shoulder, single driving lane.
    body += road_xml(2, 200.0, -70.0, HALF_PI, 60.0, right=[driving, shoulder],
                     objects=["stop line"], successor_junction=910)
    body += road_xml(202, 200.0, 10.0, HALF_PI, 40.0, right=[driving],
                     predecessor_junction=910)
    body += road_xml(203, 210.0, 0.0, 0.0, 40.0, right=[driving],
                     predecessor_junction=910)
    body += junction_xml(910, [
        connection_xml(0, 2, 202, "start", -1, -1),
        connection_xml(1, 2, 203, "start", -1, -1),
    ])

    # Candidate C: right only, shoulder, two driving lanes.
    body += road_xml(3, 400.0, -70.0, HALF_PI, 60.0, right=[driving, driving, shoulder],
                     objects=["stop line"], successor_junction=920)
    body += road_xml(303, 410.0, 0.0, 0.0, 40.0, right=[driving],
                     predecessor_junction=920)
    body += junction_xml(920, [connection_xml(0, 3, 303, "start", -1, -1)])

    # Candidate D: all turn options, no shoulder, single driving lane.
    body += road_xml(4, 600.0, -70.0, HALF_PI, 60.0, right=[driving],
                     objects=["stop line"], successor_junction=930)
    body += road_xml(401, 590.0, 0.0, PI, 40.0, right=[driving],
                     predecessor_junction=930)
    body += road_xml(402, 600.0, 10.0, HALF_PI, 40.0, right=[driving],
                     predecessor_junction=930)
    body += road_xml(403, 610.0, 0.0, 0.0, 40.0, right=[driving],
                     predecessor_junction=930)
    body += junction_xml(930, [
        connection_xml(0, 4, 401, "start", -1, -1),
        connection_xml(1, 4, 402, "start", -1, -1),
        connection_xml(2, 4, 403, "start", -1, -1),
    ])

    # Candidate E: left + right, no shoulder, two driving lanes.
    body += road_xml(5, 800.0, -70.0, HALF_PI, 60.0, right=[driving, driving],
                     objects=["stop line"], successor_junction=940)
    body += road_xml(501, 790.0, 0.0, PI, 40.0, right=[driving],
                     predecessor_junction=940)
    body += road_xml(503, 810.0, 0.0, 0.0, 40.0, right=[driving],
                     predecessor_junction=940)
    body += junction_xml(940, [
        connection_xml(0, 5, 501, "start", -1, -1),
        connection_xml(1, 5, 503, "start", -1, -1),
    ])
    return document("ranking", body)


def build_parade() -> str:
    driving = ("driving", 3.5)
    sidewalk = ("sidewalk", 2.0)
    body = ""
    for k in range(12):
        body += road_xml(k + 1, 40.0 * k, 0.0, HALF_PI, 100.0,
                         right=[driving, driving, sidewalk])
    return document("parade", body)


def main():
    MAPS_DIR.mkdir(parents=True, exist_ok=True)
    for name, builder in (
        ("crossroads", build_crossroads),
        ("ranking", build_ranking),
        ("parade", build_parade),
    ):
        path = MAPS_DIR / f"{name}.xodr"
        path.write_text(builder())
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
