"""Regenerate the example dataset under src/fbsdiag/data/.

The outputs are committed; this script exists so the dataset can be
audited and rebuilt rather than edited by hand. It is deterministic:
running it twice produces byte-identical files.

    python tools/make_bundled_data.py
"""

from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import yaml

from fbsdiag.evaluation import EvalSuite, GroundTruth, SuiteQuery, suite_to_document
from fbsdiag.ingest import (
    CausePair,
    FailureEntry,
    ModelEntry,
    ModelSpec,
    RecordSpec,
    add_maintenance_record,
    build_fbs_model,
    corpus_to_document,
    failure_id_for,
    model_spec_to_document,
)
from fbsdiag.ontology import Level
from fbsdiag.store import save_graph

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "fbsdiag" / "data"

# One entry per process: label, per-process symptom pool, and five process
# elements. Each element: label, its characteristic malfunction, whether its
# two behaviors run concurrently (no step order), and the behaviors as
# (label, fault subject, structures).
LINE = [
    {
        "label": "roof assembly",
        "inspection": False,
        "symptoms": [
            "roof misaligned on the car body",
            "roof missing from the finished car",
            "roof scratched on the top face",
            "roof tilted toward the hood",
            "roof overhanging the windshield edge",
            "roof dropped beside the pallet",
            "roof placed rotated by a quarter turn",
        ],
        "elements": [
            {
                "label": "pick roof from feeder",
                "fault": "no roof picked from the feeder",
                "concurrent": False,
                "behaviors": [
                    (
                        "escapement separates a single roof from the feeder track",
                        "escapement stroke",
                        ["parts feeder", "escapement pawl"],
                    ),
                    ("suction pad grips the roof top face", "suction grip", ["vacuum pad"]),
                ],
            },
            {
                "label": "chuck the roof",
                "fault": "roof slips inside the chuck",
                "concurrent": False,
                "behaviors": [
                    ("chuck jaws close on the roof flanks", "chuck jaw motion", ["chuck unit"]),
                    (
                        "proximity switch confirms the roof is held",
                        "grip confirmation",
                        ["grip sensor"],
                    ),
                ],
            },
            {
                "label": "transfer roof to workpiece",
                "fault": "roof dropped during transfer",
                "concurrent": False,
                "behaviors": [
                    (
                        "transfer arm swings from feeder to pallet",
                        "transfer arm swing",
                        ["transfer arm", "arm drive belt"],
                    ),
                    (
                        "arm decelerates before the placement point",
                        "approach deceleration",
                        ["servo controller"],
                    ),
                ],
            },
            {
                "label": "release roof onto workpiece",
                "fault": "roof released off target",
                "concurrent": False,
                "behaviors": [
                    ("chuck jaws open above the car body", "jaw release", ["jaw return spring"]),
                    ("vacuum breaks to let the roof settle", "vacuum break", ["vacuum valve"]),
                ],
            },
            {
                "label": "verify roof seating",
                "fault": "seated roof reported missing",
                "concurrent": False,
                "behaviors": [
                    ("camera sights the roof edge line", "edge sighting", ["seating camera"]),
                    (
                        "controller compares the edge line with the template",
                        "template comparison",
                        ["vision controller"],
                    ),
                ],
            },
        ],
    },
    {
        "label": "roof press-fitting",
        "inspection": False,
        "symptoms": [
            "roof pressed in skewed",
            "roof cracked under the press",
            "press mark left on the roof",
            "roof not fully seated after pressing",
            "car body deformed at the press station",
            "double press cycle on one car",
            "press stopped mid stroke with the car inside",
        ],
        "elements": [
            {
                "label": "position pallet under press",
                "fault": "pallet stops short of the press center",
                "concurrent": False,
                "behaviors": [
                    (
                        "stopper arrests the pallet at the press station",
                        "pallet arrest",
                        ["pallet stopper"],
                    ),
                    ("locating pins center the pallet", "pallet centering", ["locating pin"]),
                ],
            },
            {
                "label": "align press head",
                "fault": "press head misaligned with the roof",
                "concurrent": False,
                "behaviors": [
                    (
                        "press head slides along the guide posts",
                        "head travel",
                        ["guide post", "head bushing"],
                    ),
                    ("alignment mark meets the datum window", "datum alignment", ["datum plate"]),
                ],
            },
            {
                "label": "lower press cylinder",
                "fault": "cylinder descends too fast",
                "concurrent": False,
                "behaviors": [
                    ("cylinder extends at creep speed", "cylinder extension", ["press cylinder"]),
                    (
                        "flow valve limits the descent rate",
                        "descent metering",
                        ["flow control valve"],
                    ),
                ],
            },
            {
                "label": "apply press load",
                "fault": "press load below the set force",
                "concurrent": True,
                "behaviors": [
                    ("ram presses the roof to the set force", "ram loading", ["press ram"]),
                    ("load cell tracks the applied force", "force tracking", ["load cell"]),
                ],
            },
            {
                "label": "retract press cylinder",
                "fault": "cylinder fails to retract fully",
                "concurrent": False,
                "behaviors": [
                    ("cylinder returns to the upper limit", "cylinder return", ["return spring"]),
                    (
                        "limit switch signals the retracted position",
                        "retract signalling",
                        ["upper limit switch"],
                    ),
                ],
            },
        ],
    },
    {
        "label": "roof-height inspection",
        "inspection": True,
        "symptoms": [
            "roof height reading out of tolerance",
            "roof height reading missing for a pallet",
            "gauge crashes into the roof",
            "identical height logged for every car",
            "height verdict flips between repeat runs",
            "gauge stuck at the lowered position",
            "pallet released before the reading finished",
        ],
        "elements": [
            {
                "label": "move pallet to gauge station",
                "fault": "pallet overruns the gauge station",
                "concurrent": False,
                "behaviors": [
                    ("conveyor indexes the pallet one pitch", "pallet indexing", ["index conveyor"]),
                    ("shot pin locks the pallet in place", "pallet locking", ["shot pin"]),
                ],
            },
            {
                "label": "lower height gauge",
                "fault": "gauge descends past the soft limit",
                "concurrent": False,
                "behaviors": [
                    (
                        "gauge head descends on a ball screw",
                        "gauge descent",
                        ["gauge ball screw", "gauge motor"],
                    ),
                    ("counterweight balances the gauge head", "head balancing", ["counterweight"]),
                ],
            },
            {
                "label": "probe roof surface",
                "fault": "probe misses the roof crown",
                "concurrent": False,
                "behaviors": [
                    ("probe tip touches the roof at three points", "probe contact", ["touch probe"]),
                    (
                        "probe deflection closes the contact circuit",
                        "contact detection",
                        ["contact amplifier"],
                    ),
                ],
            },
            {
                "label": "log height reading",
                "fault": "height reading not stored",
                "concurrent": False,
                "behaviors": [
                    ("encoder reports the gauge position", "position readout", ["linear encoder"]),
                    (
                        "logger stores the reading with the pallet id",
                        "reading storage",
                        ["data logger"],
                    ),
                ],
            },
            {
                "label": "raise height gauge",
                "fault": "gauge parks below the clear height",
                "concurrent": False,
                "behaviors": [
                    ("gauge head returns to the park height", "gauge return", ["park dog"]),
                    ("brake holds the head at park", "park holding", ["motor brake"]),
                ],
            },
        ],
    },
    {
        "label": "image inspection",
        "inspection": True,
        "symptoms": [
            "good car rejected by image check",
            "defective car passed by image check",
            "body image blurred beyond use",
            "image verdict missing for a pallet",
            "same verdict stamped on consecutive cars",
            "image capture triggered twice per car",
            "dark frame captured instead of the body",
        ],
        "elements": [
            {
                "label": "position pallet under camera",
                "fault": "pallet sits outside the camera field",
                "concurrent": False,
                "behaviors": [
                    (
                        "stopper holds the pallet in the camera field",
                        "pallet holding",
                        ["camera stopper"],
                    ),
                    ("diffuser evens the field illumination", "field illumination", ["light diffuser"]),
                ],
            },
            {
                "label": "trigger ring light",
                "fault": "strobe misses the exposure window",
                "concurrent": False,
                "behaviors": [
                    (
                        "strobe fires on the stopper signal",
                        "strobe firing",
                        ["ring strobe", "strobe driver"],
                    ),
                    ("shutter opens inside the strobe window", "shutter timing", ["camera shutter"]),
                ],
            },
            {
                "label": "capture body image",
                "fault": "captured frame partly clipped",
                "concurrent": False,
                "behaviors": [
                    ("sensor integrates the body image", "image integration", ["area sensor"]),
                    ("frame grabber moves the image to memory", "frame transfer", ["frame grabber"]),
                ],
            },
            {
                "label": "match image against reference",
                "fault": "match score drifts across the shift",
                "concurrent": False,
                "behaviors": [
                    (
                        "matcher scores the image against the golden sample",
                        "match scoring",
                        ["match processor"],
                    ),
                    (
                        "threshold turns the score into a verdict",
                        "verdict thresholding",
                        ["threshold table"],
                    ),
                ],
            },
            {
                "label": "record inspection verdict",
                "fault": "verdict written to the wrong pallet",
                "concurrent": False,
                "behaviors": [
                    ("verdict writes to the pallet tag", "tag writing", ["tag writer"]),
                    (
                        "reject flag routes the pallet at the diverter",
                        "reject routing",
                        ["diverter flag"],
                    ),
                ],
            },
        ],
    },
    {
        "label": "performance inspection",
        "inspection": True,
        "symptoms": [
            "rolling resistance reads above the limit",
            "steering play reads at zero for every car",
            "car stalls on the test rig",
            "wheels spin without reaching set speed",
            "test aborts before the measurement window",
            "car comes off the rig with flat spots",
            "resistance trace saturates mid test",
        ],
        "elements": [
            {
                "label": "clamp car on test rig",
                "fault": "car shifts inside the clamps",
                "concurrent": False,
                "behaviors": [
                    ("clamp arms close on the car sills", "clamp closing", ["clamp arm"]),
                    (
                        "pressure switch confirms the clamp force",
                        "clamp confirmation",
                        ["clamp pressure switch"],
                    ),
                ],
            },
            {
                "label": "drive wheels at set speed",
                "fault": "wheel speed hunts around the set point",
                "concurrent": True,
                "behaviors": [
                    (
                        "roller spins the wheels through friction",
                        "roller drive",
                        ["drive roller", "roller motor"],
                    ),
                    ("tachometer tracks the roller speed", "speed tracking", ["roller tachometer"]),
                ],
            },
            {
                "label": "measure rolling resistance",
                "fault": "resistance reading wanders at steady speed",
                "concurrent": True,
                "behaviors": [
                    ("torque arm reacts the drive torque", "torque reaction", ["torque arm"]),
                    (
                        "strain gauge converts the torque to a signal",
                        "torque sensing",
                        ["strain gauge"],
                    ),
                ],
            },
            {
                "label": "check steering free play",
                "fault": "steering check skipped on some cars",
                "concurrent": False,
                "behaviors": [
                    ("actuator rocks the steering link", "link rocking", ["steering actuator"]),
                    ("dial gauge reads the link travel", "travel readout", ["dial gauge"]),
                ],
            },
            {
                "label": "unclamp car from test rig",
                "fault": "clamps hang half open after the test",
                "concurrent": False,
                "behaviors": [
                    ("clamp arms open to the rest stop", "clamp opening", ["arm rest stop"]),
                    ("rig vents the clamp line", "line venting", ["vent valve"]),
                ],
            },
        ],
    },
    {
        "label": "product collection",
        "inspection": False,
        "symptoms": [
            "finished car left on the pallet",
            "car dropped between chute and tray",
            "two cars stacked into one tray cell",
            "car jammed halfway down the chute",
            "empty pallet fails to return",
            "tray advanced past the empty cell",
            "car scratched during collection",
        ],
        "elements": [
            {
                "label": "lift car from pallet",
                "fault": "forks lift the car unevenly",
                "concurrent": False,
                "behaviors": [
                    ("lifter forks slide under the car", "fork entry", ["lifter fork"]),
                    ("lift cylinder raises the forks", "fork lifting", ["lift cylinder"]),
                ],
            },
            {
                "label": "move car to chute",
                "fault": "carriage stops short of the chute",
                "concurrent": False,
                "behaviors": [
                    (
                        "carriage travels along the overhead rail",
                        "carriage travel",
                        ["overhead rail", "carriage wheel"],
                    ),
                    ("damper stops the carriage at the chute", "carriage damping", ["carriage damper"]),
                ],
            },
            {
                "label": "release car into chute",
                "fault": "car tumbles on release",
                "concurrent": False,
                "behaviors": [
                    ("forks tilt to let the car slide", "fork tilting", ["tilt cam"]),
                    (
                        "chute guides the car to the tray level",
                        "chute guiding",
                        ["collection chute"],
                    ),
                ],
            },
            {
                "label": "stack car in tray",
                "fault": "car stacked askew in the tray",
                "concurrent": False,
                "behaviors": [
                    (
                        "pusher squares the car in the tray cell",
                        "car squaring",
                        ["tray pusher", "pusher pad"],
                    ),
                    ("tray indexes to the next empty cell", "tray indexing", ["tray index motor"]),
                ],
            },
            {
                "label": "return empty pallet",
                "fault": "pallet return queue backs up",
                "concurrent": False,
                "behaviors": [
                    (
                        "return conveyor carries the pallet to the line head",
                        "pallet return",
                        ["return conveyor"],
                    ),
                    ("pallet counter tallies the returns", "return counting", ["pallet counter"]),
                ],
            },
        ],
    },
]

BFAULTS = ("lag", "drift", "stall", "jitter", "overshoot")
DEFECTS = ("wear", "looseness", "contamination", "fatigue", "misadjustment", "lubrication starvation")
AUTHORS = ("t.sato", "k.mori", "a.tanaka", "j.ito", "m.hayashi")
NOTES = (
    "noticed during the morning patrol",
    "reported by the downstream operator",
    "found after a customer return",
    "flagged by the shift summary",
)

# Failure counts per record cycle through this; 28 cycles of 6 records.
LENGTHS = (5, 6, 7, 7, 8, 9)

# Per length: attachment slots and (effect, cause) index pairs. Slot tokens:
# PF = the process, PE = the element, (B, b) = behavior b, (S, b, v) = a
# structure of behavior b (v picks among its structures, wrapping).
SHAPES = {
    5: (
        ["PF", "PE", ("B", 0), ("S", 0, 0), ("S", 0, 1)],
        [(0, 1), (1, 2), (2, 3), (3, 4)],
    ),
    6: (
        ["PF", "PE", ("B", 0), ("B", 1), ("S", 0, 0), ("S", 1, 0)],
        [(0, 1), (1, 2), (1, 3), (2, 4), (3, 5)],
    ),
    7: (
        ["PF", "PE", ("B", 0), ("B", 1), ("S", 0, 0), ("S", 1, 0), ("S", 1, 1)],
        [(0, 1), (1, 2), (1, 3), (2, 4), (3, 5), (5, 6)],
    ),
    8: (
        ["PF", "PE", ("B", 0), ("B", 0), ("B", 1), ("S", 0, 0), ("S", 1, 0), ("S", 1, 1)],
        [(0, 1), (1, 2), (2, 3), (1, 4), (3, 5), (4, 6), (6, 7)],
    ),
    9: (
        [
            "PF",
            "PE",
            ("B", 0),
            ("B", 0),
            ("B", 1),
            ("S", 0, 0),
            ("S", 0, 1),
            ("S", 1, 0),
            ("S", 1, 1),
        ],
        [(0, 1), (1, 2), (2, 3), (1, 4), (3, 5), (5, 6), (4, 7), (7, 8)],
    ),
}


def make_model_spec() -> ModelSpec:
    process_entries = []
    for process in LINE:
        element_entries = []
        for element in process["elements"]:
            behavior_entries = []
            for behavior_label, _subject, structures in element["behaviors"]:
                behavior_entries.append(
                    ModelEntry(
                        label=behavior_label,
                        children=[ModelEntry(label=s) for s in structures],
                    )
                )
            sequences = []
            if not element["concurrent"]:
                sequences = [[b.label for b in behavior_entries]]
            element_entries.append(
                ModelEntry(
                    label=element["label"],
                    children=behavior_entries,
                    sequences=sequences,
                )
            )
        process_entries.append(
            ModelEntry(
                label=process["label"],
                children=element_entries,
                sequences=[[e.label for e in element_entries]],
            )
        )
    root = ModelEntry(
        label="model car assembly line",
        level=Level.LINE_FUNCTION,
        description="desk-scale line assembling a toy model car on circulating pallets",
        children=process_entries,
        sequences=[[p.label for p in process_entries]],
    )
    return ModelSpec(roots=[root], source="bundled example dataset")


def record_index(p: int, k: int) -> int:
    """Global index of the k-th record of process p (see make_records)."""
    return 6 * k + ((p - k) % 6)


def make_records(spec: ModelSpec) -> list[RecordSpec]:
    root = spec.roots[0]
    root_id = "model-car-assembly-line"

    def slug(text: str) -> str:
        keep = [ch if ch.isalnum() else "-" for ch in text.lower()]
        out = "".join(keep)
        while "--" in out:
            out = out.replace("--", "-")
        return out.strip("-")

    records: list[RecordSpec] = [None] * (6 * 28)  # type: ignore[list-item]
    for p, process in enumerate(LINE):
        process_id = f"{root_id}/{slug(process['label'])}"
        for k in range(28):
            r = record_index(p, k)
            length = LENGTHS[(p - k) % 6]
            element = process["elements"][k % 5]
            element_id = f"{process_id}/{slug(element['label'])}"
            slots, pairs = SHAPES[length]

            failures: list[FailureEntry] = []
            for pos, slot in enumerate(slots):
                if slot == "PF":
                    label = process["symptoms"][k % 7]
                    attach = process_id
                    category = "accuracy"
                elif slot == "PE":
                    label = element["fault"]
                    attach = element_id
                    category = "accuracy" if process["inspection"] else "motion"
                elif slot[0] == "B":
                    _, b = slot
                    behavior_label, subject, _structures = element["behaviors"][b]
                    label = f"{subject} {BFAULTS[(k + pos) % 5]}"
                    attach = f"{element_id}/{slug(behavior_label)}"
                    category = "motion"
                else:
                    _, b, v = slot
                    behavior_label, _subject, structures = element["behaviors"][b]
                    structure = structures[v % len(structures)]
                    label = f"{structure} {DEFECTS[(k + pos) % 6]}"
                    attach = f"{element_id}/{slug(behavior_label)}/{slug(structure)}"
                    category = "mechanism_structure"
                description = ""
                if pos == 0 and k % 4 == 0:
                    description = NOTES[(k // 4) % 4]
                elif pos == 1 and k % 9 == 5:
                    description = "recurred within one shift after reset"
                elif pos == length - 1 and k % 6 == 3:
                    description = "confirmed during teardown of the unit"
                failures.append(
                    FailureEntry(
                        key=f"f{pos}",
                        label=label,
                        category=category,
                        attach=attach,
                        description=description,
                    )
                )

            causes = [CausePair(effect=f"f{e}", cause=f"f{c}") for e, c in pairs]
            # Every fifth revisit of an element ties back to the root cause
            # recorded there five visits earlier.
            if k >= 5 and k % 5 == 0:
                prev_r = record_index(p, k - 5)
                prev_length = LENGTHS[(p - (k - 5)) % 6]
                causes.append(
                    CausePair(
                        effect="f1",
                        cause_existing=failure_id_for(
                            f"mr-{prev_r + 1:04d}", f"f{prev_length - 1}"
                        ),
                    )
                )

            records[r] = RecordSpec(
                record_id=f"mr-{r + 1:04d}",
                failures=failures,
                causes=causes,
                author=AUTHORS[r % 5],
                date=(date(2024, 1, 8) + timedelta(days=4 * r)).isoformat(),
            )
    return records


def make_suite() -> EvalSuite:
    # Both queries target the "chuck the roof" element of roof assembly. The
    # corpus revisits that element six times with varying fault wording, so
    # the truth names each fault family once and lists the observed wordings
    # as aliases; any variant counts for its family.
    element = LINE[0]["elements"][1]
    (_, b1_subject, b1_structs), (_, b2_subject, b2_structs) = element["behaviors"]
    families = {
        f"{b1_subject} disturbance": [f"{b1_subject} {w}" for w in BFAULTS],
        f"{b2_subject} disturbance": [f"{b2_subject} {w}" for w in BFAULTS],
        f"{b1_structs[0]} degradation": [f"{b1_structs[0]} {w}" for w in DEFECTS],
        f"{b2_structs[0]} degradation": [f"{b2_structs[0]} {w}" for w in DEFECTS],
    }
    aliases = {item: tuple(forms) for item, forms in families.items()}
    return EvalSuite(
        queries=[
            SuiteQuery(
                query_id="q-roof-missing",
                description="roof missing from the finished car near the chuck",
                ground_truth=GroundTruth(
                    query_id="q-roof-missing",
                    items=(element["fault"], *families),
                    aliases=aliases,
                ),
                level=Level.PROCESS_FUNCTION,
            ),
            SuiteQuery(
                query_id="q-chuck-slip",
                description="roof slips inside the chuck during transfer to the car body",
                ground_truth=GroundTruth(
                    query_id="q-chuck-slip",
                    items=tuple(families),
                    aliases=aliases,
                ),
                level=Level.PROCESS_ELEMENT_FUNCTION,
                attach_hint="model-car-assembly-line/roof-assembly",
            ),
        ]
    )


def dump(data: object, path: Path) -> None:
    path.write_text(
        yaml.safe_dump(data, sort_keys=False, allow_unicode=True, width=2**16),
        encoding="utf-8",
    )


def main() -> None:
    spec = make_model_spec()
    graph = build_fbs_model(spec)
    assert len(graph.system_nodes) == 165, len(graph.system_nodes)
    assert len(graph.edges) == 220, len(graph.edges)

    records = make_records(spec)
    assert len(records) == 168
    assert sum(len(r.failures) for r in records) == 1176

    full = build_fbs_model(spec)
    for record in records:
        add_maintenance_record(full, record)
    assert len(full.failure_nodes) == 1176

    suite = make_suite()

    DATA_DIR.mkdir(parents=True, exist_ok=True)
    dump(model_spec_to_document(spec), DATA_DIR / "example_line_model.yaml")
    dump(corpus_to_document(records), DATA_DIR / "example_line_records.yaml")
    dump(suite_to_document(suite), DATA_DIR / "example_suite.yaml")

    # the shipped graph carries the replayed corpus, ready to query
    full.created = "2025-06-02T09:00:00+00:00"
    save_graph(full, DATA_DIR / "example_line.dkg")

    print(
        f"wrote {DATA_DIR}: model {len(graph.system_nodes)} nodes / "
        f"{len(graph.edges)} edges, {len(records)} records / "
        f"{sum(len(r.failures) for r in records)} failures, "
        f"{len(suite.queries)} suite queries"
    )


if __name__ == "__main__":
    main()
