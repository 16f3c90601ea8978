"""Rebuild ssa_cohort_survival.csv from SSA historical death probabilities.

Input: the SOA XTbML tables 1501 (male) and 1502 (female), "SSA Mortality
Rates for the period 1900-2007", as shipped in the pymort wheel.
Usage: python3 build_cohorts.py path/to/pymort-*.whl > ssa_cohort_survival.csv
"""
import re
import sys
import zipfile

FIRST, LAST_OBS = 1900, 2007
IMPROVEMENT_BASE = 1987
MAX_AGE = 120


def load(whl, table):
    text = whl.read(f"pymort/table_xml/t{table}.xml").decode("utf-8-sig")
    q = {}
    for m in re.finditer(r'<Axis t="(\d+)">\s*<Axis>(.*?)</Axis>', text, re.S):
        age = int(m.group(1))
        for year, v in re.findall(r'<Y t="(\d+)">([^<]+)</Y>', m.group(2)):
            q[age, int(year)] = float(v)
    return q


def cohort(q, birth_year):
    # Death probabilities after LAST_OBS decline at each age's average
    # annual rate over IMPROVEMENT_BASE..LAST_OBS.
    span = LAST_OBS - IMPROVEMENT_BASE
    shares, alive = [], 1.0
    for age in range(MAX_AGE + 1):
        shares.append(alive)
        year = birth_year + age
        if (age, LAST_OBS) not in q:
            qx = 1.0
        elif year <= LAST_OBS:
            qx = q[age, year]
        else:
            ratio = q[age, LAST_OBS] / q[age, IMPROVEMENT_BASE]
            r = max(0.0, 1.0 - ratio ** (1.0 / span))
            qx = min(1.0, q[age, LAST_OBS] * (1.0 - r) ** (year - LAST_OBS))
        alive *= 1.0 - qx
    return shares


def main():
    whl = zipfile.ZipFile(sys.argv[1])
    male, female = load(whl, 1501), load(whl, 1502)
    print("birth_year,age,share_alive")
    for b in range(FIRST, 2101, 10):
        for age, (m, f) in enumerate(zip(cohort(male, b), cohort(female, b))):
            print(f"{b},{age},{(m + f) / 2:.10g}")


if __name__ == "__main__":
    main()
