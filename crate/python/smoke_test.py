"""Smoke test for the pymatchmarket extension.

Build and install first:  pip install maturin && maturin develop -m crates/py/Cargo.toml
"""

import json

import pymatchmarket as mm


def main():
    auction = mm.Market([[10, 8]], items=["painting"], buyers=["alice", "bob"])
    assert auction.n == 2
    assert auction.is_dummy_item(auction.items[1])

    solved = auction.solve()
    assert solved["value"] == 10
    assert solved["assignment"]["painting"] == "alice"

    outcome = auction.buyer_optimal()
    assert outcome["prices"]["painting"] == 8, outcome
    assert outcome["certified"]
    assert auction.vcg_prices()["painting"] == 8
    assert auction.check_equivalence()

    assert auction.verify([8, 0])
    assert auction.verify([9, 0])
    assert not auction.verify([11, 0])

    diagonal = mm.Market.from_json(json.dumps({
        "items": ["north", "south"],
        "buyers": ["ann", "ben"],
        "valuations": [[3, 1], [1, 2]],
    }))
    assert diagonal.brute_force_value() == diagonal.solve()["value"] == 5
    assert mm.Market.from_json(diagonal.to_json()).to_json() == diagonal.to_json()

    audit = diagonal.audit("ben", trials=50, seed=1)
    assert audit["violations"] == 0 and audit["max_utility_delta"] <= 0, audit

    try:
        mm.Market([[-1]])
    except ValueError as err:
        assert "negative valuation" in str(err)
    else:
        raise AssertionError("negative valuation accepted")

    print("pymatchmarket smoke test passed")


if __name__ == "__main__":
    main()
