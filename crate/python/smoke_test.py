"""Smoke test for the iwasawa_py extension module."""

import json

import iwasawa_py as iw


def main():
    x = iw.LieElement(4, "R", [{"i": 1, "j": 2, "c": 0, "value": "1/2"},
                               {"i": 2, "j": 3, "c": 0, "value": "-3"}])
    g = x.exp()
    assert g.log() == x
    assert (g * g.inverse()) == iw.GroupElement.identity(4, "R")
    assert x.dilate("2").coords()[0] == "1"

    e12 = iw.LieElement.unit(3, "C", 1, 2, 0)
    e23 = iw.LieElement.unit(3, "C", 2, 3, 1)
    top = e12.bracket(e23)
    assert top == iw.LieElement.unit(3, "C", 1, 3, 1)

    flag = iw.Flag.alpha(g)
    assert flag.in_nhat()
    assert flag.alpha_inverse() == g
    assert flag.psi().psi() == flag
    assert not iw.Flag.base_plus(4, "R").in_nhat()

    singular = iw.GradedMap(4, "R", [[0, 0, 0], [0, 0, 0], [0, 0, 0]])
    ident = iw.GradedMap.from_certificate(3, "H", {"epsilon": 0, "lambda": [1, 1, 1], "h": "id"})
    assert ident.classify()["epsilon"] == 0
    try:
        singular.classify()
    except ArithmeticError:
        pass
    else:
        raise AssertionError("a singular first layer map must not classify")

    report = iw.check_pair(5, "R", "omega_plus", "eta_3_minus")
    print("pair report:", json.dumps(report, sort_keys=True))

    d = iw.pansu_diff("contact-shear")
    x12 = iw.LieElement.unit(3, "R", 1, 2, 0)
    assert d.apply(x12) == x12
    assert d.to_json()["n"] == 3

    code, out, err = iw.cli(["algebra", "check", "--n", "3", "--field", "R"])
    assert code == 0, err
    json.loads(out)
    code, _, _ = iw.cli(["algebra", "frobnicate"])
    assert code == 2
    print("smoke test passed")


if __name__ == "__main__":
    main()
