"""End-to-end run orchestration: provision parties, execute, verify, report.

Loopback runs drive every party as a thread inside this process; TCP
runs spawn one OS process per party (input parties and the function
party) and merge their sender-side transcripts afterwards.  With the
``verify`` flag the orchestrator recomputes the plaintext gram matrix
as an oracle and checks the protocol output against it -- in a real
deployment that would defeat the point, so it is strictly a testing
facility.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import struct
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import transport as tp
from .costs import ESCAPED, PROTOCOLS, RE, cost_model, transcript_audit
from .errors import ConfigError, MpgramError, ProtocolError
from .field import make_domain
from .kernel import KernelMatrix, rbf_from_gram
from .masking import leakage_view, make_party_state, verify_leakage_view
from .matrix import (
    Matrix,
    encode_real_matrix,
    gram_t,
    load_real_csv,
)
from .party import (
    FunctionPartyResult,
    SessionSpec,
    build_loopback_meshes,
    fp_hello_phase,
    function_party_session,
    input_party_session,
    ip_hello_phase,
)
from .seeds import derive_seed

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    m: int
    features: int
    samples: tuple
    domain: str = "field"
    scale_bits: int = 16
    transport: str = "loopback"
    base_port: int = 0
    seed: int = 0
    sigma: float = None
    data_csv: tuple = None
    transpose: bool = False
    verify: bool = True

    def validate(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.m < 2:
            raise ConfigError(f"need at least 2 input parties, got {self.m}")
        if len(self.samples) != self.m:
            raise ConfigError(f"{self.m} parties but {len(self.samples)} sample counts")
        if any(n < 1 for n in self.samples):
            raise ConfigError("every party needs at least one sample")
        if self.features < 1:
            raise ConfigError(f"features must be >= 1, got {self.features}")
        if self.domain not in ("field", "float"):
            raise ConfigError(f"domain must be field or float, got {self.domain!r}")
        if self.transport not in ("loopback", "tcp"):
            raise ConfigError(f"transport must be loopback or tcp, got {self.transport!r}")
        if self.data_csv is not None and len(self.data_csv) != self.m:
            raise ConfigError(f"{self.m} parties but {len(self.data_csv)} data files")
        if self.sigma is not None and self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")


@dataclass
class RunResult:
    config: RunConfig
    report: dict
    assembly: object
    fp_result: FunctionPartyResult
    transcript: tp.Transcript
    gram_real: np.ndarray
    kernel: KernelMatrix = None
    party_data: dict = field(default_factory=dict)


def synthesize_party_reals(seed: int, party_id: int, f: int, n: int) -> list:
    """Reproducible synthetic data, uniform in [-1, 1], shape f x n."""
    rng = np.random.default_rng(derive_seed(seed, "data", party_id))
    return rng.uniform(-1.0, 1.0, (f, n)).tolist()


def gen_data(m: int, f: int, samples, seed: int, out_dir) -> list:
    """Write one features-x-samples CSV of reals per party; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(1, m + 1):
        rows = synthesize_party_reals(seed, i, f, samples[i - 1])
        path = os.path.join(out_dir, f"party_{i}.csv")
        with open(path, "w") as fh:
            for row in rows:
                fh.write(",".join(format(x, ".17g") for x in row))
                fh.write("\n")
        paths.append(path)
    return paths


def _load_party_reals(config: RunConfig) -> dict:
    reals = {}
    for i in range(1, config.m + 1):
        if config.data_csv is not None:
            rows = load_real_csv(config.data_csv[i - 1], transpose=config.transpose)
        else:
            rows = synthesize_party_reals(config.seed, i, config.features, config.samples[i - 1])
        if len(rows) != config.features or any(len(r) != config.samples[i - 1] for r in rows):
            raise ConfigError(
                f"party {i} data is {len(rows)}x{len(rows[0]) if rows else 0}, "
                f"expected {config.features} features x {config.samples[i - 1]} samples"
            )
        reals[i] = rows
    return reals


def run(config: RunConfig) -> RunResult:
    config.validate()
    domain = make_domain(config.domain, config.scale_bits)
    t0 = time.perf_counter()
    reals = _load_party_reals(config)
    data = {i: encode_real_matrix(reals[i], domain) for i in reals}
    t_data = time.perf_counter() - t0

    t1 = time.perf_counter()
    if config.transport == "loopback":
        fp_result, transcript = _run_loopback(config, domain, data)
    else:
        fp_result, transcript = _run_tcp(config, domain, reals)
    t_protocol = time.perf_counter() - t1

    t2 = time.perf_counter()
    gram = fp_result.assembly.full
    gram_real = np.array(
        [[domain.decode_dot(gram.get(r, c)) for c in range(gram.cols)] for r in range(gram.rows)]
    )

    verification = {"enabled": bool(config.verify), "status": "skipped"}
    leakage = None
    if config.verify:
        verification = _verify_against_oracle(domain, data, gram)
        if config.protocol == ESCAPED:
            states = {i: make_party_state(i, data[i], config.seed) for i in data}
            view = leakage_view(fp_result.self_blocks, fp_result.pair_results)
            dev = verify_leakage_view(view, states)
            leakage = {
                "verified": dev == 0.0 if domain.kind == "field" else dev <= 1e-9,
                "max_deviation": dev,
            }

    prediction = cost_model(config.protocol, config.m, config.features, config.samples)
    audit = transcript_audit(transcript, prediction, strict=False)

    kernel = None
    if config.sigma is not None:
        kernel = rbf_from_gram(gram_real, config.sigma)
    t_post = time.perf_counter() - t2

    report = {
        "schema_version": SCHEMA_VERSION,
        "protocol": config.protocol,
        "m": config.m,
        "features": config.features,
        "samples": list(config.samples),
        "domain": config.domain,
        "scale_bits": config.scale_bits,
        "transport": config.transport,
        "seed": config.seed,
        "sigma": config.sigma,
        "gram": {"n": gram.rows, "sha256": _gram_sha(gram)},
        "verification": verification,
        "leakage": leakage,
        "audit": audit.as_dict(),
        "costs": prediction.as_dict(),
        "totals": transcript.totals(),
        "transcript_sha256": transcript.digest(),
        "kernel": None
        if kernel is None
        else {"sigma": kernel.sigma, "sha256": _kernel_sha(kernel)},
        "timing": {
            "data_s": t_data,
            "protocol_s": t_protocol,
            "post_s": t_post,
            "total_s": time.perf_counter() - t0,
        },
    }
    report["determinism_digest"] = determinism_digest(report)
    return RunResult(
        config=config,
        report=report,
        assembly=fp_result.assembly,
        fp_result=fp_result,
        transcript=transcript,
        gram_real=gram_real,
        kernel=kernel,
        party_data=data,
    )


def determinism_digest(report: dict) -> str:
    """Digest of the report minus wall-clock fields; equal for equal runs."""
    core = {k: v for k, v in report.items() if k not in ("timing", "determinism_digest")}
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


def _gram_sha(gram: Matrix) -> str:
    h = hashlib.sha256(struct.pack("<II", gram.rows, gram.cols))
    dom = gram.domain
    for x in gram.data:
        h.update(dom.to_bytes(x))
    return h.hexdigest()


def _kernel_sha(kernel: KernelMatrix) -> str:
    h = hashlib.sha256(struct.pack("<Id", kernel.n, kernel.sigma))
    h.update(kernel.entries.astype("<f8").tobytes())
    return h.hexdigest()


def plaintext_gram(domain, data: dict) -> Matrix:
    """Oracle: gram of the column-concatenated party matrices."""
    ids = sorted(data)
    f = data[ids[0]].rows
    rows = []
    for r in range(f):
        row = []
        for i in ids:
            row.extend(data[i].row(r))
        rows.append(row)
    full = Matrix.from_rows(rows, domain)
    return gram_t(full, full)


def _verify_against_oracle(domain, data: dict, gram: Matrix) -> dict:
    oracle = plaintext_gram(domain, data)
    if domain.kind == "field":
        ok = oracle.data == gram.data
        return {
            "enabled": True,
            "status": "pass" if ok else "fail",
            "max_abs_deviation": 0.0 if ok else _decoded_dev(domain, gram, oracle),
            "bound": 0.0,
        }
    dev = 0.0
    for g, o in zip(gram.data, oracle.data):
        dev = max(dev, abs(g - o) / max(1.0, abs(o)))
    return {
        "enabled": True,
        "status": "pass" if dev <= 1e-9 else "fail",
        "max_abs_deviation": dev,
        "bound": 1e-9,
    }


def _decoded_dev(domain, a: Matrix, b: Matrix) -> float:
    return max(
        abs(domain.decode_dot(x) - domain.decode_dot(y)) for x, y in zip(a.data, b.data)
    )


# -- loopback execution ------------------------------------------------------


def _run_loopback(config: RunConfig, domain, data: dict):
    transcript = tp.Transcript()
    spec = SessionSpec(config.protocol, config.m, config.features, domain, config.seed)
    ip_meshes, fp_mesh = build_loopback_meshes(config.m, transcript)
    failures = {}
    result_box = {}

    def ip_main(i: int):
        mesh = ip_meshes[i]
        try:
            ip_hello_phase(mesh, data[i].cols)
            input_party_session(spec, i, data[i], mesh)
        except Exception as exc:  # noqa: BLE001 - reported with party context
            failures[i] = exc

    def fp_main():
        try:
            fp_hello_phase(fp_mesh)
            result_box["fp"] = function_party_session(spec, fp_mesh)
        except Exception as exc:  # noqa: BLE001
            failures[tp.FUNCTION_PARTY_ID] = exc

    threads = [threading.Thread(target=ip_main, args=(i,), daemon=True) for i in data]
    threads.append(threading.Thread(target=fp_main, daemon=True))
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=300)
    if failures:
        pid, exc = sorted(failures.items())[0]
        who = "function party" if pid == tp.FUNCTION_PARTY_ID else f"party {pid}"
        raise ProtocolError(f"{who} failed: {exc}") from exc
    if "fp" not in result_box:
        raise ProtocolError("run did not complete: function party produced no result")
    return result_box["fp"], transcript


# -- TCP execution (one OS process per party) ---------------------------------


def _free_ports(count: int) -> list:
    import socket as _socket

    socks, ports = [], []
    for _ in range(count):
        s = _socket.socket()
        s.bind(("127.0.0.1", 0))
        socks.append(s)
        ports.append(s.getsockname()[1])
    for s in socks:
        s.close()
    return ports


def _run_tcp(config: RunConfig, domain, reals: dict):
    rundir = tempfile.mkdtemp(prefix="mpgram-run-")
    try:
        if config.base_port:
            ports = {i: config.base_port + i for i in range(config.m + 1)}
        else:
            flat = _free_ports(config.m + 1)
            ports = {i: flat[i] for i in range(config.m + 1)}

        csv_paths = {}
        for i, rows in reals.items():
            path = os.path.join(rundir, f"party_{i}.csv")
            with open(path, "w") as fh:
                for row in rows:
                    fh.write(",".join(format(x, ".17g") for x in row))
                    fh.write("\n")
            csv_paths[i] = path

        procs = []
        out_paths = {}
        for pid in range(config.m + 1):
            cfg = {
                "role": "fp" if pid == 0 else "ip",
                "party_id": pid,
                "protocol": config.protocol,
                "m": config.m,
                "features": config.features,
                "domain": config.domain,
                "scale_bits": config.scale_bits,
                "seed": config.seed,
                "host": "127.0.0.1",
                "ports": {str(k): v for k, v in ports.items()},
                "data_csv": csv_paths.get(pid),
                "out_path": os.path.join(rundir, f"out_{pid}.json"),
            }
            cfg_path = os.path.join(rundir, f"cfg_{pid}.json")
            with open(cfg_path, "w") as fh:
                json.dump(cfg, fh)
            out_paths[pid] = cfg["out_path"]
            procs.append(
                (
                    pid,
                    subprocess.Popen(
                        [sys.executable, "-m", "mpgram.worker", cfg_path],
                        stdout=subprocess.PIPE,
                        stderr=subprocess.PIPE,
                    ),
                )
            )
        errors = []
        for pid, proc in procs:
            try:
                _, err = proc.communicate(timeout=300)
            except subprocess.TimeoutExpired:
                proc.kill()
                _, err = proc.communicate()
                errors.append(f"party {pid} timed out")
                continue
            if proc.returncode != 0:
                tail = err.decode(errors="replace").strip().splitlines()[-3:]
                errors.append(f"party {pid} exited {proc.returncode}: {' | '.join(tail)}")
        if errors:
            raise ProtocolError("; ".join(errors))

        transcript = tp.Transcript()
        fp_doc = None
        for pid, path in out_paths.items():
            with open(path) as fh:
                doc = json.load(fh)
            transcript.extend(tp.Transcript.from_json_entries(doc["transcript"]).entries)
            if pid == 0:
                fp_doc = doc["result"]
        fp_result = _fp_result_from_doc(fp_doc, domain, config.protocol)
        return fp_result, transcript
    finally:
        shutil.rmtree(rundir, ignore_errors=True)


def mat_to_doc(m: Matrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "data": list(m.data)}


def mat_from_doc(doc: dict, domain) -> Matrix:
    return Matrix(doc["rows"], doc["cols"], tuple(doc["data"]), domain)


def _fp_result_from_doc(doc: dict, domain, protocol: str) -> FunctionPartyResult:
    from .masking import PairResult, assemble_gram

    sizes = {int(k): v for k, v in doc["sizes"].items()}
    self_blocks = {int(k): mat_from_doc(v, domain) for k, v in doc["self_blocks"].items()}
    if protocol == ESCAPED:
        pair_results = {}
        for pr in doc["pair_results"]:
            key = (pr["alice"], pr["bob"])
            pair_results[key] = PairResult(
                pr["alice"],
                pr["bob"],
                mat_from_doc(pr["a1"], domain),
                mat_from_doc(pr["b1"], domain),
                mat_from_doc(pr["b2"], domain),
                pr["alpha"],
            )
        assembly = assemble_gram(self_blocks, pair_results)
        cross = dict(assembly.cross_blocks)
    else:
        pair_results = None
        cross = {
            (cb["alice"], cb["bob"]): mat_from_doc(cb["block"], domain)
            for cb in doc["cross_blocks"]
        }
        assembly = assemble_gram(self_blocks, cross)
    return FunctionPartyResult(assembly, self_blocks, pair_results, cross, sizes)


# -- protocol comparison -------------------------------------------------------


@dataclass
class ComparisonResult:
    results: list
    byte_ratio: float  # re / escaped
    element_ratio: float
    grams_equal: bool

    def table_text(self) -> str:
        header = f"{'protocol':<10}{'wall_s':>10}{'bytes':>14}{'elements':>14}  verification"
        lines = [header, "-" * len(header)]
        for r in self.results:
            tot = r.report["totals"]["total"]
            lines.append(
                f"{r.config.protocol:<10}"
                f"{r.report['timing']['total_s']:>10.3f}"
                f"{tot['bytes']:>14}"
                f"{tot['elements']:>14}"
                f"  {r.report['verification']['status']}"
            )
        lines.append(
            f"byte ratio re/escaped: {self.byte_ratio:.2f}; "
            f"element ratio: {self.element_ratio:.2f}; "
            f"identical gram: {self.grams_equal}"
        )
        return "\n".join(lines)


def compare(configs) -> ComparisonResult:
    """Run the given configs (same everything, different protocol) and compare."""
    configs = list(configs)
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    base = configs[0]
    for c in configs[1:]:
        if replace(c, protocol=base.protocol) != base:
            raise ConfigError("compare configs must differ only in protocol")
    if len({c.protocol for c in configs}) != len(configs):
        raise ConfigError("compare configs must have distinct protocols")

    results = [run(c) for c in configs]
    by_proto = {r.config.protocol: r for r in results}
    shas = {r.report["gram"]["sha256"] for r in results}
    grams_equal = len(shas) == 1
    if base.domain == "field" and not grams_equal:
        raise MpgramError("protocols disagree on the gram matrix over the field")
    byte_ratio = element_ratio = float("nan")
    if ESCAPED in by_proto and RE in by_proto:
        esc = by_proto[ESCAPED].report["totals"]["total"]
        ren = by_proto[RE].report["totals"]["total"]
        byte_ratio = ren["bytes"] / esc["bytes"]
        element_ratio = ren["elements"] / esc["elements"]
    return ComparisonResult(results, byte_ratio, element_ratio, grams_equal)
