"""Command-line interface: chain specs in, CSV/JSON artifacts + manifests out.

Subcommands::

    spectra     parity-resolved spectra of the candidate two-site couplings
    swap-check  is exp(i t H) a SWAP gate (up to global phase)?
    transfer    amplitude scan over a time grid (full space or sigma block)
    pst-check   qutrit transfer fidelities of the engineered presets
    tomography  one-end parameter estimation of a hidden engineered chain
    validate    schema-check a chain-spec JSON file

Times are accepted as plain numbers or exact multiples of pi: ``pi``,
``0.5pi``, ``2pi/3``.  Exit codes: 0 success (and check passed), 2 usage or
input error, 4 a verification-style check failed; errors are mirrored as
JSON on stderr.
"""

import argparse
import json
import os
import re
import sys

import numpy as np

from . import __version__
from .dynamics import (
    QUTRIT_TEST_STATES,
    amplitude_scan,
    evolution_cache,
    qutrit_transfer_fidelity,
)
from .hamiltonians import (
    CANDIDATE_NAMES,
    ChainSpec,
    PRESET_VARIANTS,
    SpecError,
    candidate_two_site,
    chain_hamiltonian,
    engineered_sigma_block,
    heisenberg_two_site,
    mix_two_site,
    pst_preset,
    squared_sum_two_site,
    swap_check,
)
from .parity import CANDIDATE_FORMS, LITERATURE_SPECTRA, parity_spectrum, reference_comparison
from .reporting import RunManifest, fmt, resolve_output_dir, write_csv, write_json
from .spin_ops import basis_index
from .tomography import (
    band_matrix,
    full_tomography,
    probability_mode_analysis,
    read_record_csv,
    synthesize_record,
    tomography_from_records,
    write_record_csv,
)

_TIME_RE = re.compile(r"^([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)?\s*(pi)?\s*(?:/\s*([0-9]+))?$")


def parse_time(text):
    """Parse '0.5pi', 'pi', '2pi/3' or a plain float into seconds of evolution."""
    m = _TIME_RE.match(text.strip())
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ValueError(f"cannot parse time {text!r}; use e.g. 1.5, pi, 0.5pi, 2pi/3")
    value = float(m.group(1)) if m.group(1) else 1.0
    if m.group(2):
        value *= np.pi
    if m.group(3):
        if not m.group(2):
            raise ValueError(f"divisor without pi in {text!r}")
        value /= int(m.group(3))
    return value


def _error(payload, code):
    json.dump({"error": payload}, sys.stderr, sort_keys=True)
    sys.stderr.write("\n")
    return code


def _load_spec(args):
    if getattr(args, "spec", None):
        try:
            return ChainSpec.load(args.spec), args.spec
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read spec file: {exc}") from exc
    if getattr(args, "preset_n", None):
        return pst_preset(args.preset_n, args.preset_variant), None
    raise SpecError("provide --spec FILE or --preset-n N")


def _time_grid(args):
    t_max = parse_time(args.t_max)
    dt = float(args.dt)
    if dt <= 0 or t_max <= 0:
        raise SpecError("time grid requires positive --t-max and --dt")
    return np.arange(0.0, t_max, dt)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectra(args):
    names = [args.op] if args.op else list(CANDIDATE_NAMES)
    entries = []
    all_adjudicated = True
    for name in names:
        split = parity_spectrum(candidate_two_site(name), kind="two_site_exchange")
        cmp = reference_comparison(name, split)
        all_adjudicated &= cmp["matches_adjudicated"]
        entries.append({
            "name": name,
            "form": CANDIDATE_FORMS[name],
            "even": list(split.even),
            "odd": list(split.odd),
            "literature_even": list(LITERATURE_SPECTRA[name][0]),
            "literature_odd": list(LITERATURE_SPECTRA[name][1]),
            **cmp,
        })
    payload = {"operators": entries, "all_match_adjudicated": all_adjudicated}
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for e in entries:
            even = ", ".join(f"{v:.6g}" for v in e["even"])
            odd = ", ".join(f"{v:.6g}" for v in e["odd"])
            if e["matches_literature"]:
                flag = "ok"
            elif e["matches_adjudicated"]:
                flag = f"DIFFERS FROM TABULATED VALUES: {e['note']}"
            else:
                flag = f"MISMATCH ({e['deviation_from_adjudicated']:.2e})"
            print(f"{e['name']:3s}  {e['form']:40s} even: {{{even}}}  odd: {{{odd}}}  [{flag}]")
    if args.output_dir or args.tag:
        outdir = resolve_output_dir(args.output_dir)
        base = os.path.join(outdir, args.tag or "spectra")
        write_json(base + "_spectra.json", payload)
        RunManifest("spectra", None, {"op": args.op or "all", "format": args.format},
                    (base + "_spectra.json",), None).write(base + "_manifest.json")
    if not all_adjudicated:
        return _error({"check": "spectra",
                       "message": "computed spectra deviate from the adjudicated references"}, 4)
    return 0


_SWAP_INTERACTIONS = {
    "mix": mix_two_site,
    "squared_sum": squared_sum_two_site,
    "heisenberg": heisenberg_two_site,
    **{name: (lambda nm=name: candidate_two_site(nm)) for name in CANDIDATE_NAMES},
}


def cmd_swap_check(args):
    t = parse_time(args.time)
    ham = _SWAP_INTERACTIONS[args.interaction]()
    cache = evolution_cache(ham)
    es = cache.eigensystem
    unitary = (es.eigenvectors * np.exp(1j * args.sign * es.eigenvalues * t)) @ es.eigenvectors.conj().T
    result = swap_check(unitary, tol=args.tol)
    payload = {
        "interaction": args.interaction,
        "time": t,
        "is_swap_up_to_phase": result.is_swap_up_to_phase,
        "phase_re": result.phase.real,
        "phase_im": result.phase.imag,
        "residual": result.residual,
    }
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    if not result.is_swap_up_to_phase:
        return _error({"check": "swap", "residual": result.residual}, 4)
    return 0


def cmd_transfer(args):
    spec, spec_path = _load_spec(args)
    times = _time_grid(args)
    outdir = resolve_output_dir(args.output_dir)
    base = os.path.join(outdir, args.tag or "transfer")
    if args.channel:
        if spec.kind != "engineered":
            raise SpecError("--channel scans need an engineered chain")
        block = engineered_sigma_block(spec)
        offset = 0 if args.channel == "up" else spec.n + 1
        source = offset + (args.source_site or 1) - 1
        target = offset + (args.target_site or spec.n) - 1
        scan = amplitude_scan(block, source, target, times, sign=spec.time_sign)
        source_label = f"{args.channel}@{args.source_site or 1}"
        target_label = f"{args.channel}@{args.target_site or spec.n}"
    else:
        if not args.source or not args.target:
            raise SpecError("full-space scans need --source and --target basis labels")
        ham = chain_hamiltonian(spec)
        scan = amplitude_scan(ham, basis_index(args.source, spec.n),
                              basis_index(args.target, spec.n), times, sign=spec.time_sign)
        source_label, target_label = args.source, args.target
    csv_path = base + "_series.csv"
    write_csv(csv_path, ("t", "abs", "arg"), scan.rows())
    summary = {
        "source": source_label,
        "target": target_label,
        "n": spec.n,
        "kind": spec.kind,
        "max_abs": scan.max_abs,
        "argmax_time": scan.argmax_time,
        "first_peak_time": scan.first_peak_time,
        "grid": {"t_max": float(times[-1] + (times[1] - times[0])), "dt": float(args.dt),
                 "points": int(times.size)},
    }
    summary_path = base + "_summary.json"
    write_json(summary_path, summary)
    RunManifest("transfer", spec_path,
                {"source": source_label, "target": target_label, "t_max": args.t_max,
                 "dt": args.dt, "channel": args.channel,
                 "preset_n": args.preset_n, "preset_variant": args.preset_variant},
                (csv_path, summary_path), None).write(base + "_manifest.json")
    print(f"max |amplitude| = {fmt(scan.max_abs)} at t = {fmt(scan.argmax_time)} "
          f"(first peak t = {fmt(scan.first_peak_time)}); series -> {csv_path}")
    return 0


def cmd_pst_check(args):
    t = parse_time(args.time)
    spec = pst_preset(args.n, args.variant)
    states = []
    for amp in QUTRIT_TEST_STATES:
        raw = qutrit_transfer_fidelity(spec, amp, t, phase_correct=False)
        corrected = qutrit_transfer_fidelity(spec, amp, t, phase_correct=True)
        states.append({
            "qutrit": [[z.real, z.imag] for z in map(complex, amp)],
            "raw_fidelity": raw,
            "corrected_fidelity": corrected,
        })
    payload = {
        "n": args.n,
        "variant": args.variant,
        "time": t,
        "couplings": list(spec.a),
        "quadratic_field": spec.C[0],
        "states": states,
        "min_raw_fidelity": min(s["raw_fidelity"] for s in states),
        "min_corrected_fidelity": min(s["corrected_fidelity"] for s in states),
    }
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    if args.output_dir or args.tag or args.scan:
        outdir = resolve_output_dir(args.output_dir)
        base = os.path.join(outdir, args.tag or f"pst_{args.variant}_n{args.n}")
        outputs = [base + "_report.json"]
        write_json(base + "_report.json", payload)
        if args.scan:
            balanced = QUTRIT_TEST_STATES[3]
            grid = _time_grid(args)
            rows = ((ti, qutrit_transfer_fidelity(spec, balanced, ti,
                                                  phase_correct=args.phase_correct))
                    for ti in grid)
            write_csv(base + "_fidelity.csv", ("t", "fidelity"), rows)
            outputs.append(base + "_fidelity.csv")
        RunManifest("pst-check", None,
                    {"n": args.n, "variant": args.variant, "time": args.time,
                     "scan": bool(args.scan), "phase_correct": bool(args.phase_correct),
                     "t_max": args.t_max, "dt": args.dt},
                    tuple(outputs), None).write(base + "_manifest.json")
    return 0


def _auto_dt(spec):
    """Safe sampling step from a Gershgorin bound on the band matrices."""
    bound = 0.0
    for channel in ("up", "down"):
        mat = band_matrix(spec, channel)
        radii = np.sum(np.abs(mat), axis=1)
        bound = max(bound, float(np.max(radii)))
    bound = max(bound, 1e-6)
    return np.pi / (1.3 * bound)


def cmd_tomography(args):
    outdir = resolve_output_dir(args.output_dir)
    base = os.path.join(outdir, args.tag or "tomography")
    outputs = []
    if args.record_up or args.record_down:
        if not (args.record_up and args.record_down and args.order):
            raise SpecError("file-based tomography needs --record-up, --record-down "
                            "and --order")
        rec_up = read_record_csv(args.record_up, "up", shots=args.shots)
        rec_down = read_record_csv(args.record_down, "down", shots=args.shots)
        result = tomography_from_records(rec_up, rec_down, args.order)
        payload = result.to_json_dict()
        spec_path = None
        parameters = {"mode": "amplitude", "order": args.order,
                      "record_up": args.record_up, "record_down": args.record_down}
    else:
        spec, spec_path = _load_spec(args)
        if spec.kind != "engineered":
            raise SpecError("tomography addresses engineered chains")
        dt = float(args.dt) if args.dt else _auto_dt(spec)
        samples = args.samples or max(16 * spec.n, 64)
        times = dt * np.arange(samples)
        parameters = {"mode": args.mode, "dt": dt, "samples": int(samples),
                      "shots": args.shots, "preset_n": args.preset_n,
                      "preset_variant": args.preset_variant}
        if args.mode == "amplitude":
            result = full_tomography(spec, times, mode="amplitude", shots=args.shots,
                                     seed=args.seed)
            payload = result.to_json_dict()
        else:
            payload = {"mode": "probability", "channels": {}}
            for k, channel in enumerate(("up", "down")):
                record = synthesize_record(spec, channel, "probability", times,
                                           shots=args.shots,
                                           seed=None if args.seed is None else args.seed + k)
                report = probability_mode_analysis(record)
                payload["channels"][channel] = {
                    "gaps": list(report.gaps),
                    "pair_weights": list(report.pair_weights),
                    "dc": report.dc,
                }
            payload["note"] = ("probability records determine eigenvalue gaps and weight "
                               "products only; absolute energies need amplitude records")
        if args.emit_records:
            for k, channel in enumerate(("up", "down")):
                record = synthesize_record(spec, channel, args.mode, times,
                                           shots=args.shots,
                                           seed=None if args.seed is None else args.seed + k)
                path = f"{base}_record_{channel}.csv"
                write_record_csv(record, path)
                outputs.append(path)
    result_path = base + "_result.json"
    write_json(result_path, payload)
    outputs.insert(0, result_path)
    RunManifest("tomography", spec_path, parameters,
                tuple(outputs), args.seed).write(base + "_manifest.json")
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_validate(args):
    try:
        spec = ChainSpec.load(args.spec)
    except SpecError as exc:
        return _error({"stage": "schema", "path": exc.path, "message": str(exc)}, 2)
    except (OSError, json.JSONDecodeError) as exc:
        return _error({"stage": "io", "message": str(exc)}, 2)
    print(json.dumps(spec.to_json_dict(), sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="spin1chain", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"spin1chain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectra", help="parity-resolved spectra of candidate couplings")
    p.add_argument("--op", choices=CANDIDATE_NAMES, help="single coupling (default: all)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output-dir")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("swap-check", help="test exp(i t H) against SWAP up to phase")
    p.add_argument("--interaction", choices=sorted(_SWAP_INTERACTIONS), default="mix")
    p.add_argument("--time", default="pi")
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_swap_check)

    p = sub.add_parser("transfer", help="amplitude scan over a time grid")
    p.add_argument("--spec", help="chain-spec JSON file")
    p.add_argument("--preset-n", type=int, help="build a transfer preset instead of --spec")
    p.add_argument("--preset-variant", choices=PRESET_VARIANTS, default="standard")
    p.add_argument("--source", help="full-space source label over {1,0,m}, e.g. 001")
    p.add_argument("--target", help="full-space target label")
    p.add_argument("--channel", choices=("up", "down"),
                   help="scan the sigma block of an engineered chain instead")
    p.add_argument("--source-site", type=int)
    p.add_argument("--target-site", type=int)
    p.add_argument("--t-max", default="4pi")
    p.add_argument("--dt", default="1e-3")
    p.add_argument("--output-dir")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("pst-check", help="preset qutrit transfer fidelities at a given time")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--variant", choices=PRESET_VARIANTS, default="standard")
    p.add_argument("--time", default="pi")
    p.add_argument("--scan", action="store_true",
                   help="also write a t,fidelity series for the balanced qutrit")
    p.add_argument("--phase-correct", action="store_true",
                   help="scan the phase-corrected fidelity instead of the raw one")
    p.add_argument("--t-max", default="2pi")
    p.add_argument("--dt", default="1e-2")
    p.add_argument("--output-dir")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_pst_check)

    p = sub.add_parser("tomography", help="estimate chain parameters from one-end records")
    p.add_argument("--spec", help="hidden chain-spec JSON file")
    p.add_argument("--preset-n", type=int)
    p.add_argument("--preset-variant", choices=PRESET_VARIANTS, default="standard")
    p.add_argument("--mode", choices=("amplitude", "probability"), default="amplitude")
    p.add_argument("--dt", help="sampling step (default: auto from a spectral bound)")
    p.add_argument("--samples", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--emit-records", action="store_true",
                   help="also write the measurement records as CSV files")
    p.add_argument("--record-up", help="consume an existing up-channel record CSV")
    p.add_argument("--record-down", help="consume an existing down-channel record CSV")
    p.add_argument("--order", type=int, help="band dimension when consuming record files")
    p.add_argument("--output-dir")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("validate", help="schema-check a chain-spec JSON file")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        return _error({"stage": "spec", "path": exc.path, "message": str(exc)}, 2)
    except (ValueError, RuntimeError) as exc:
        return _error({"stage": args.command, "message": str(exc)}, 2)


if __name__ == "__main__":
    sys.exit(main())
