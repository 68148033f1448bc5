"""Model, ensemble, mask and vote tally files.

A model file starts with ``E2EFS`` and a version byte, then UTF-8
``key=value`` header lines (spec, seed, shuffle_seed, mask, loss) closed
by an empty line, then the parameter vector as little-endian float64.
"""
import pathlib

import numpy as np
import yaml

from ..entities.ensemble import Ensemble
from ..entities.network import NetworkSpec, Parameters
from ..entities.selection import FeatureMask
from ..exceptions import DataError
from ..losses import LossSpec
from ..nn.network import Network

MAGIC = b"E2EFS"
VERSION = b"\x01"
ENSEMBLE_MANIFEST = "ensemble.yaml"


def _mask_field(mask):
    if mask is None:
        return "none"
    return f"{mask.origin}:{mask.n_bands}:" + ",".join(
        str(i) for i in mask.indices)


def _parse_mask(text):
    if text == "none":
        return None
    origin, n_bands, indices = text.split(":")
    return FeatureMask(
        [int(i) for i in indices.split(",")], origin, int(n_bands))


def encode_model(spec, params, loss, mask=None, shuffle_seed=None):
    if shuffle_seed is None:
        shuffle_seed = params.seed
    header = [
        f"spec={spec.to_json()}",
        f"seed={params.seed}",
        f"shuffle_seed={shuffle_seed}",
        f"mask={_mask_field(mask)}",
        f"loss={loss.identifier}",
    ]
    text = "\n".join(header) + "\n\n"
    return (MAGIC + VERSION + text.encode("utf-8")
            + params.values.astype("<f8").tobytes())


def decode_model(data, source="<bytes>"):
    """
    :returns: tuple (spec, params, loss, mask, header dict).
    """
    if data[:len(MAGIC)] != MAGIC:
        raise DataError(f"<{source}> is not a model file")
    if data[len(MAGIC):len(MAGIC) + 1] != VERSION:
        raise DataError(f"<{source}> has an unsupported model version")
    start = len(MAGIC) + 1
    end = data.find(b"\n\n", start)
    if end < 0:
        raise DataError(f"<{source}>: unterminated model header")
    header = {}
    for line in data[start:end].decode("utf-8").split("\n"):
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"<{source}>: bad header line <{line}>")
        header[key] = value
    try:
        spec = NetworkSpec.from_json(header["spec"])
        loss = LossSpec.parse(header["loss"])
        mask = _parse_mask(header["mask"])
        seed = None if header["seed"] == "None" else int(header["seed"])
    except (KeyError, ValueError) as err:
        raise DataError(f"<{source}>: bad model header: {err}") from err
    body = data[end + 2:]
    layout = Network(spec).layout
    expected = sum(int(np.prod(shape)) for _, shape in layout)
    if len(body) != 8 * expected:
        raise DataError(
            f"<{source}>: {len(body)} parameter bytes, the spec needs "
            f"{8 * expected}")
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return spec, Parameters(values, layout, seed=seed), loss, mask, header


def save_model(path, spec, params, loss, mask=None):
    pathlib.Path(path).write_bytes(encode_model(spec, params, loss, mask))


def load_model(path):
    path = pathlib.Path(path)
    if not path.is_file():
        raise DataError(f"model file <{path}> not found")
    return decode_model(path.read_bytes(), source=path)


def save_ensemble(ens, directory):
    """Write one model file per member and an ``ensemble.yaml`` index."""
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i, params in enumerate(ens.members):
        name = f"member_{i:02d}.e2efs"
        save_model(directory / name, ens.spec, params, ens.loss, ens.mask)
        files.append(name)
    index = dict(
        size=ens.size,
        seeds=[int(s) for s in ens.seeds],
        loss=ens.loss.identifier,
        mask=_mask_field(ens.mask),
        spec=ens.spec.to_json(),
        members=files)
    (directory / ENSEMBLE_MANIFEST).write_text(
        yaml.safe_dump(index, sort_keys=True))


def load_ensemble(directory):
    """
    Load an ensemble directory.

    :raises DataError: if files are missing or members disagree on their
        specification.
    """
    directory = pathlib.Path(directory)
    if not (directory / ENSEMBLE_MANIFEST).is_file():
        raise DataError(f"<{directory}> is not an ensemble directory")
    index = yaml.safe_load((directory / ENSEMBLE_MANIFEST).read_text())
    members = []
    spec = loss = mask = None
    for name in index["members"]:
        member_spec, params, loss, mask, _ = load_model(directory / name)
        if spec is not None and member_spec != spec:
            raise DataError(
                f"<{directory / name}> has a different network spec")
        spec = member_spec
        members.append(params)
    if "spec" in index and NetworkSpec.from_json(index["spec"]) != spec:
        raise DataError(
            f"<{directory / ENSEMBLE_MANIFEST}> lists a different network "
            "spec than its members")
    return Ensemble(spec, members, [p.seed for p in members], loss, mask=mask)


def save_mask(path, mask):
    """Mask text file: a ``# origin=<kind> n=<n> F=<F>`` line, then indices."""
    lines = [f"# origin={mask.origin} n={len(mask)} F={mask.n_bands}"]
    lines += [str(i) for i in mask.indices]
    pathlib.Path(path).write_text("\n".join(lines) + "\n")


def load_mask(path):
    path = pathlib.Path(path)
    if not path.is_file():
        raise DataError(f"mask file <{path}> not found")
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise DataError(f"<{path}>: missing mask header")
    try:
        fields = dict(item.split("=", 1) for item in lines[0][2:].split())
        indices = [int(line) for line in lines[1:] if line.strip()]
        n, n_bands = int(fields["n"]), int(fields["F"])
    except (KeyError, ValueError) as err:
        raise DataError(f"<{path}>: malformed mask file: {err}") from err
    if len(indices) != n:
        raise DataError(
            f"<{path}>: header announces {n} indices, found {len(indices)}")
    return FeatureMask(indices, fields["origin"], n_bands)


def save_tally(path, tally):
    tally.to_frame().to_csv(path, index=False)
