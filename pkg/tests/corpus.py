"""Shared test corpus of (expression, centre) pairs with known answers."""

LIMITS = [
    # expression, centre, exists, value
    ("x*y/(x^2+y^2)", (0.0, 0.0), False, None),
    ("x^2*y^2/(x^2+y^2)", (0.0, 0.0), True, 0.0),
    ("7", (0.3, -1.2), True, 7.0),
    ("x+y", (1.0, 2.0), True, 3.0),
    ("(x^2-y^2)/(x^2+y^2)", (0.0, 0.0), False, None),
    ("sin(x*y)/(x*y+1)", (0.5, 0.5), True, None),
    ("x^3/(x^2+y^2)", (0.0, 0.0), True, 0.0),
    ("x*y*z/(x^2+y^2+z^2)", (0.0, 0.0, 0.0), True, 0.0),
    ("x*y/(x^2+y^2+z^2)", (0.0, 0.0, 0.0), False, None),
]

DIFFERENTIABILITY = [
    # expression, centre, differentiable
    ("sqrt(x*y)", (0.0, 0.0), False),
    ("sqrt(x*y)", (1.0, 1.0), True),
    ("sqrt(x*y)", (4.0, 1.0), True),
    ("x^2+y^2", (0.0, 0.0), True),
    ("abs(x)+y", (0.0, 0.0), False),
    ("sqrt(x^2+y^2)", (0.0, 0.0), False),
    ("sin(x)*exp(y)", (0.3, 0.2), True),
    ("x^2*y^2/(x^2+y^2)", (1.0, -1.0), True),
    ("x*y*z+x", (1.0, 2.0, 3.0), True),
    ("abs(x*y)", (0.0, 0.0), True),
]
