"""Golden CLI invocations: name -> (argv, expected exit code)."""
M2 = ["--workspace", "examples/m2.alg"]
FN = ["--workspace", "examples/functions.alg"]
MO = ["--workspace", "examples/moyal.alg"]

CASES = {
    "positivity_fail": (["check-positivity", *M2, "--algebra", "m2", "--element", "E11-E22"], 1),
    "positivity_pass": (["check-positivity", *M2, "--algebra", "m2", "--element", "E11+E12+E21+E22"], 0),
    "functional_positive": (["check-positivity", *M2, "--algebra", "m2", "--functional", "trace"], 0),
    "gns_trace": (["gns", *M2, "--algebra", "m2", "--functional", "trace"], 0),
    "gns_eval": (["gns", *FN, "--algebra", "f2", "--functional", "ev0"], 0),
    "tensor_row_column": (["tensor", *M2, "--left", "projection", "--right", "defining"], 0),
    "verify_a2": (["verify-equivalence", *M2, "--bimodule", "a2", "--level", "strong"], 0),
    "verify_indefinite": (["verify-equivalence", *M2, "--bimodule", "a2_indefinite", "--level", "ring"], 0),
    "verify_signature_star": (["verify-equivalence", *FN, "--bimodule", "signature", "--level", "star"], 0),
    "verify_signature_strong": (["verify-equivalence", *FN, "--bimodule", "signature", "--level", "strong"], 1),
    "compose_inverse": (["compose", *M2, "--left", "a2_inverse", "--right", "a2"], 0),
    "picard_f2": (["picard", *FN, "--algebra", "f2"], 0),
    "k0_projection": (["k0-action", *M2, "--module", "projection", "--bimodule", "a2"], 0),
    "rep_transfer": (["rep-transfer", *M2, "--bimodule", "a2_inverse", "--module", "defining"], 0),
    "moyal_axioms": (["star-product", *MO, "--star-product", "moyal2", "--check", "3"], 0),
    "moyal_product": (["star-product", *MO, "--star-product", "moyal2", "--left", "x", "--right", "p"], 0),
    "lift_gaussian": (["deform-functional", *MO, "--functional", "gaussian", "--star-product", "moyal2",
                       "--order", "1"], 0),
    "lift_delta": (["deform-functional", *MO, "--functional", "delta", "--star-product", "moyal2",
                    "--order", "1", "--test-degree", "1"], 0),
    "limit_column": (["classical-limit", *MO, "--bimodule", "column_l"], 0),
    "json_gns": (["gns", *M2, "--algebra", "m2", "--functional", "trace", "--json"], 0),
}
