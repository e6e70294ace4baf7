"""Command-line front end.

Exit codes: 0 success/pass, 1 verification fail, 2 input format error,
3 dimension/precondition error, 4 non-unitary input matrix.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import circuit_ir, matrix_core, synthesis
from .errors import DimensionError, FormatError, NotUnitaryError, WireError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_FORMAT = 2
EXIT_DIMENSION = 3
EXIT_NOT_UNITARY = 4


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read_circuit(path: str) -> circuit_ir.Circuit:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return circuit_ir.deserialize(data)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _read_state(path: str) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict) or "dim" not in data or "amplitudes" not in data:
        raise FormatError(f"{path}: expected an object with 'dim' and 'amplitudes'")
    amps = data["amplitudes"]
    if not isinstance(amps, list):
        raise FormatError(f"{path}: 'amplitudes' must be a list")
    state = np.array([matrix_core.decode_complex(z, f"amplitudes[{i}]") for i, z in enumerate(amps)])
    if len(state) != data["dim"]:
        raise FormatError(f"{path}: {len(state)} amplitudes but dim {data['dim']}")
    norm = np.linalg.norm(state)
    if abs(norm - 1) > 1e-12 * max(1, len(state)):
        raise DimensionError(f"{path}: state norm {norm!r} is not 1")
    return state


def state_to_json(state) -> dict:
    state = np.asarray(state, dtype=complex)
    return {"dim": len(state), "amplitudes": [[float(z.real), float(z.imag)] for z in state]}


def cmd_synth(args) -> int:
    W = matrix_core.read_unitary(args.input)
    circuit = synthesis.synthesize_structured(W, parallel=not args.seedless_deterministic)
    circuit = synthesis.lower_circuit(circuit, args.level, optimize=args.optimize)
    _write(args.out, circuit_ir.serialize(circuit).decode())

    if args.level == synthesis.ELEMENTARY:
        skipped = synthesis.unlowered_gates(circuit)
        if skipped:
            idx = ", ".join(str(i) for i, _ in skipped)
            print(f"not lowered: {len(skipped)} gates with >= 2 controls (indices {idx})")
    if args.counts:
        print(circuit_ir.format_counts(circuit_ir.gate_counts(circuit)))
    if args.verify:
        report = synthesis.verify(circuit, W, args.tol)
        print(_verdict(report))
        return EXIT_OK if report.passed else EXIT_FAIL
    return EXIT_OK


def _verdict(report: synthesis.VerifyReport) -> str:
    status = "PASS" if report.passed else "FAIL"
    return f"residual: {report.residual:.6e} tol: {report.tol:.6e} {status}"


def cmd_random(args) -> int:
    if args.qutrits < 1:
        raise DimensionError(f"--qutrits must be >= 1, got {args.qutrits}")
    W = matrix_core.haar_random_unitary(3 ** args.qutrits, args.seed)
    _write(args.out, matrix_core.dumps(matrix_core.unitary_to_json(W)))
    return EXIT_OK


def cmd_verify(args) -> int:
    W = matrix_core.read_unitary(args.unitary)
    circuit = _read_circuit(args.circuit)
    report = synthesis.verify(circuit, W, args.tol)
    print(_verdict(report))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_simulate(args) -> int:
    circuit = _read_circuit(args.circuit)
    if args.state is not None:
        state = _read_state(args.state)
    else:
        state = matrix_core.basis_state(circuit.dim, args.basis)
    out = circuit_ir.apply(circuit, state)
    _write(args.out, matrix_core.dumps(state_to_json(out)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qutritsynth", description="CSD-based synthesis of qutrit unitaries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a unitary file into a circuit file")
    p.add_argument("input")
    p.add_argument("--level", choices=[synthesis.STRUCTURED, synthesis.ELEMENTARY], default=synthesis.STRUCTURED)
    p.add_argument("--out", help="circuit output path (default: stdout)")
    p.add_argument("--verify", action="store_true", help="check the circuit against the input")
    p.add_argument("--tol", type=float, default=None, help="verification tolerance (default 1e-9 * dim)")
    p.add_argument("--counts", action="store_true", help="print the gate count table")
    p.add_argument("--optimize", action="store_true", help="drop MS gates with identity payload")
    p.add_argument("--seedless-deterministic", action="store_true",
                   help="evaluate every CSD sequentially in emission order")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("random", help="write a Haar-random unitary file")
    p.add_argument("--qutrits", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("verify", help="check a circuit file against a unitary file")
    p.add_argument("--unitary", required=True)
    p.add_argument("--circuit", required=True)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="apply a circuit to a state")
    p.add_argument("--circuit", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state")
    src.add_argument("--basis", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotUnitaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_UNITARY
    except (DimensionError, WireError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
