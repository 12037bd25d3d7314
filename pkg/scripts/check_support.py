"""Shared helpers for the scripts/check-*.py validations."""

import os
import sys

_REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _REPO_ROOT not in sys.path:
    sys.path.insert(0, _REPO_ROOT)

BERLIN52 = os.path.join(_REPO_ROOT, "data", "berlin52.tsp")
SLOW = "--slow" in sys.argv

ERRORS = []
TEST_NUM = 0


def ok(msg: str) -> None:
    global TEST_NUM
    TEST_NUM += 1
    print(f"  [{TEST_NUM}] {msg} ... OK")


def fail(msg: str) -> None:
    global TEST_NUM
    TEST_NUM += 1
    print(f"  [{TEST_NUM}] {msg} ... FAIL")
    ERRORS.append(f"  [{TEST_NUM}] {msg}")


def check(cond: bool, msg: str) -> None:
    ok(msg) if cond else fail(msg)


def raises(exc_type, fn, *args, **kwargs) -> bool:
    try:
        fn(*args, **kwargs)
    except exc_type:
        return True
    except Exception as exc:  # wrong exception type
        print(f"      unexpected {type(exc).__name__}: {exc}")
        return False
    return False


def section(title: str) -> None:
    print()
    print(f"--- {title} ---")


def berlin(n: int | None = None, caf: bool = False):
    """berlin52 prefix instance, optionally CAF-reduced."""
    from app.instances.tsplib_io import build_costs, load_tsplib, truncate
    from app.preprocessing.caf import CafConfig, caf_filter

    raw = load_tsplib(BERLIN52)
    if n is not None:
        raw = truncate(raw, n)
    instance = build_costs(raw)
    return caf_filter(instance, CafConfig.for_n(instance.n)) if caf else instance


def finish(title: str) -> None:
    print()
    print("=" * 42)
    if ERRORS:
        print(f"❌ {title}: {len(ERRORS)} of {TEST_NUM} checks failed")
        for e in ERRORS:
            print(e)
        sys.exit(1)
    print(f"✅ {title}: all {TEST_NUM} checks passed")
    sys.exit(0)
