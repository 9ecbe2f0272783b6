#!/usr/bin/env python3
"""Run the three canned rogue-spend scenarios and print what became of T_s.

Five nodes mine on a schedule while a rogue transaction tries to claim an
erased output with a junk unlocking script.  Depending on who erased, the
spend is discarded everywhere, briefly accepted by an erasing minority and
then reorged away, or mined into the chain everyone follows.

Run from the repository root:

    python3 demos/04_network_scenarios.py
"""

from erasechain.netsim import run_scenario
from erasechain.presets import SCENARIO_NAMES, build_scenario


def main() -> None:
    for name in SCENARIO_NAMES:
        report = run_scenario(build_scenario(name))
        print(report.summary())
        print()


if __name__ == "__main__":
    main()
