"""Smoke test for the splicekit Python module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/splicekit-py/Cargo.toml -o dist
    pip install dist/splicekit-*.whl
"""

import json

import splicekit


def main():
    names = splicekit.fixture_names()
    assert "grp_knot" in names and "cand1" in names, names
    for name in names:
        report = splicekit.run_fixture(name)
        assert report["passed"], report

    graph, action = splicekit.fixture("grp_knot")
    assert splicekit.validate(graph)["violations"] == []
    assert splicekit.validate(graph, action)["violations"] == []
    again = splicekit.Graph.from_json(graph.to_json())
    assert again.to_json() == graph.to_json()
    assert again.vertex_ids() == graph.vertex_ids()

    result = splicekit.analyze_knot(graph, action)
    assert result["verdict"]["kaw_bound"] <= 1, result["verdict"]
    splicekit.replay(json.dumps(result["certificate"]), graph, action)

    whole = splicekit.complexity(graph)
    for edge in graph.edge_ids():
        a, b = splicekit.edge_cut(graph, edge)
        assert len(a) + len(b) == len(graph)

    graph, action = splicekit.fixture("hopf_keychain")
    try:
        splicekit.analyze_link(graph, action)
    except ValueError as e:
        assert "PositiveComponentPresent" in str(e), e
    else:
        raise AssertionError("positive component accepted")

    assert splicekit.enumerate_norms([1.0, 1.5], 4.0) == [0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    assert splicekit.fox_milnor([-1, 3, -1])["result"] == "not_satisfiable"
    assert splicekit.fox_milnor([-2, 5, -2])["result"] == "satisfiable"
    print(f"smoke test passed: {len(names)} fixtures, grp_knot norm {whole['norm']['value']:.6f}")


if __name__ == "__main__":
    main()
