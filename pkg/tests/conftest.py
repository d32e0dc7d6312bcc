import pytest

from volpeaks import TransferFunction, Peak, generate_phantom, write_volume


@pytest.fixture(scope="session")
def phantom32():
    return generate_phantom((32, 32, 32))


@pytest.fixture(scope="session")
def phantom_file(tmp_path_factory, phantom32):
    """32-cubed phantom written to disk once per session."""
    path = tmp_path_factory.mktemp("vol") / "phantom.meta"
    write_volume(phantom32, path)
    return path


@pytest.fixture
def three_peak_tf():
    """The material-separation setup: one dim peak per shell value, a bright
    one for the core so inner structure stays visible through the shells."""
    return TransferFunction(
        [
            Peak(0.25, 0.08, 0.03, (0.0, 0.0, 1.0)),
            Peak(0.55, 0.08, 0.03, (1.0, 0.0, 0.0)),
            Peak(0.85, 0.08, 0.9, (0.0, 1.0, 0.0)),
        ]
    )
