"""Random ``.dsys`` files for the parser round-trip and corruption tests."""
import numpy as np

BAD_CHARS = "@$!?&~`{}|\\\"'"


def _coef(rng, params):
    k = rng.integers(0, 7)
    if k == 0:
        return str(int(rng.integers(1, 9)))
    if k == 1:
        return f"{rng.uniform(-3, 3):.4g}"
    if k == 2:
        return f"{rng.uniform(0.1, 3):.3g}i"
    if k == 3:
        return f"({rng.uniform(-2, 2):.3g}+{rng.uniform(0.1, 2):.3g}i)"
    if k == 4:
        return f"{rng.uniform(1, 9):.2f}e-3"
    if k == 5 and params:
        return str(rng.choice(params))
    return "pi/4"


def _term(rng, params, var, m):
    c = _coef(rng, params)
    x = "t" if var == "t" else "(1/s)"
    k = rng.integers(0, 8)
    if k == 0:
        return f"{c}*{x}^{int(rng.integers(1, 5))}"
    if k == 1:
        return f"exp({c}*{x})"
    if k == 2:
        return f"(1 + {c}*{x})^(1/2)"
    if k == 3:
        return f"log(1 - {c}*{x})"
    if k == 4:
        return f"{c}/(1 - {x})"
    if k == 5 and m > 1:
        return f"{c}*{x}^({int(rng.integers(1, 2 * m))}/{m})"
    if k == 6:
        return f"-{c}*{x}*{x}"
    return c


def random_file(rng) -> str:
    r = int(rng.integers(1, 4))
    m = int(rng.choice([1, 1, 2, 3]))
    var = "t" if rng.random() < 0.8 else "s"
    K = int(rng.integers(4, 13))
    params = [f"p{i}" for i in range(int(rng.integers(0, 3)))]
    lines = ["# generated test system", f"variable {var}", f"rank {r}"]
    if m > 1:
        lines.append(f"ramification {m}")
    lines.append(f"truncation {K}  # known orders")
    for p in params:
        lines.append(f"param {p} = {_coef(rng, [])}")
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            lead = f"{int(rng.integers(1, 5))}" if i == j else "0"
            extra = " + ".join(_term(rng, params, var, m) for _ in range(int(rng.integers(0, 3))))
            row.append(lead + (" + " + extra if extra else ""))
        rows.append("[" + ", ".join(row) + "]")
    lines.append("A = [" + ",\n     ".join(rows) + "]  # matrix")
    if rng.random() < 0.5:
        blocks = []
        for _ in range(r):
            blocks.append(f"({_coef(rng, params)}*s, [[{_coef(rng, params)}]])")
        lines.append("formal = [" + ", ".join(blocks) + "]")
    return "\n".join(lines) + "\n"


def comment_mask(text: str):
    mask = np.zeros(len(text), dtype=bool)
    inside = False
    for i, ch in enumerate(text):
        if ch == "#":
            inside = True
        elif ch == "\n":
            inside = False
        mask[i] = inside
    return mask


def corrupt(text: str, rng):
    """Insert or substitute an invalid character outside comments; returns (text, offset)."""
    mask = comment_mask(text)
    allowed = [i for i in range(len(text)) if not mask[i] and text[i] != "\n"]
    pos = int(rng.choice(allowed))
    ch = str(rng.choice(list(BAD_CHARS)))
    if rng.random() < 0.5:
        return text[:pos] + ch + text[pos:], pos
    return text[:pos] + ch + text[pos + 1 :], pos


def offset_of(text: str, line: int, col: int) -> int:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts[line - 1] + col - 1
