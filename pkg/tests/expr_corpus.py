"""A corpus of grammar-covering expressions with evaluation points kept
inside every guard domain (tan/sec away from poles, sqrt/ln arguments
positive, negative powers away from zero).  Shared by the expression
round-trip tests, the finite-difference checks of the jet evaluator,
and the acceptance gate."""

CORPUS = [
    ("0", {}),
    ("1.5", {}),
    ("-2.25", {}),
    ("x", {"x": 0.7}),
    ("-x", {"x": -1.3}),
    ("--x", {"x": 0.4}),
    ("x + y", {"x": 0.3, "y": -1.1}),
    ("x - y", {"x": 1.2, "y": 0.8}),
    ("x*y", {"x": -0.5, "y": 2.0}),
    ("x/y", {"x": 1.7, "y": 0.6}),
    ("x + y*z", {"x": 0.2, "y": 1.1, "z": -0.7}),
    ("(x + y)*z", {"x": 0.2, "y": 1.1, "z": -0.7}),
    ("x - y - z", {"x": 2.0, "y": 0.5, "z": 0.25}),
    ("x/y/z", {"x": 2.0, "y": 0.8, "z": 1.6}),
    ("x - -y", {"x": 0.9, "y": 0.4}),
    ("x^2", {"x": 1.3}),
    ("x^3", {"x": -0.8}),
    ("x^6", {"x": 0.9}),
    ("x^-1", {"x": 0.7}),
    ("x^-2", {"x": -1.4}),
    ("x^-3", {"x": 1.8}),
    ("-x^2", {"x": 1.1}),
    ("(-x)^2", {"x": 1.1}),
    ("2*x^2 - 3*x + 1", {"x": 0.6}),
    ("x^2*y^3", {"x": 0.8, "y": 1.2}),
    ("(x + 1)^-2", {"x": 0.5}),
    ("sin(x)", {"x": 0.8}),
    ("cos(x)", {"x": -0.6}),
    ("tan(x)", {"x": 0.5}),
    ("sec(x)", {"x": 0.4}),
    ("sqrt(x)", {"x": 2.3}),
    ("exp(x)", {"x": -0.9}),
    ("ln(x)", {"x": 1.7}),
    ("sin(2*x)", {"x": 0.35}),
    ("cos(x)^2 + sin(x)^2", {"x": 1.1}),
    ("sin(x)*cos(y)", {"x": 0.7, "y": 0.3}),
    ("tan(x/2)", {"x": 0.9}),
    ("sec(x)^2 - tan(x)^2", {"x": 0.6}),
    ("sqrt(x^2 + y^2)", {"x": 0.6, "y": 0.8}),
    ("ln(1 + x^2)", {"x": 1.5}),
    ("exp(-x^2/2)", {"x": 0.7}),
    ("exp(sin(x))", {"x": 0.4}),
    ("ln(sec(x))", {"x": 0.45}),
    ("sqrt(exp(x))", {"x": 0.8}),
    ("sin(cos(x))", {"x": 1.2}),
    ("tan(sin(x)*cos(x))", {"x": 0.7}),
    ("x*sin(y) + y*cos(x)", {"x": 0.5, "y": 1.0}),
    ("(1 + tan(x)^2)/sec(x)^2", {"x": 0.55}),
    ("x^2/(1 + y^2)", {"x": 1.1, "y": 0.4}),
    ("1/(1 + exp(-x))", {"x": 0.3}),
    ("ln(x)/x", {"x": 2.1}),
    ("sqrt(x)*ln(y)", {"x": 1.4, "y": 2.5}),
    ("sin(x + y)*cos(x - y)", {"x": 0.4, "y": 0.2}),
    ("exp(x)/(1 + x^2)", {"x": -0.5}),
    ("sec(x)*tan(x) - sin(x)/cos(x)^2", {"x": 0.35}),
    ("(x + y + z)^3", {"x": 0.2, "y": 0.3, "z": 0.1}),
    ("x*y*z + x^2 - y/z", {"x": 0.7, "y": 1.2, "z": 0.9}),
    ("cos(x)^-1", {"x": 0.5}),
    ("2^3 + x", {"x": 0.1}),
    ("-(x + sin(y))^2", {"x": 0.3, "y": 0.6}),
    ("sqrt(2 + sin(x))", {"x": -0.7}),
    ("ln(exp(x) + 1)", {"x": 0.9}),
]
