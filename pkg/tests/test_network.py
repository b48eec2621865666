import pytest

from wqsnn.network import (ConnectivitySpec, DescriptorError, NetworkDescriptor, PopulationSpec,
                           format_descriptor, global_id_range, load_descriptor, parse_descriptor,
                           validate)


def pingpong_desc(**kw):
    args = dict(sizes=[100, 100], connections=[(0, 1, 0.01), (1, 0, 0.01)], dt=1, delay=1)
    args.update(kw)
    return NetworkDescriptor.create(**args)


def test_pingpong_descriptor_is_valid():
    desc = validate(pingpong_desc())
    assert desc.num_neurons == 200
    assert desc.expected_synapses() == pytest.approx(200.0)


def test_delay_zero_rejected():
    with pytest.raises(DescriptorError, match="delay must be ≥ 1"):
        validate(pingpong_desc(delay=0))


def test_probability_out_of_range():
    with pytest.raises(DescriptorError, match="probability out of range"):
        validate(pingpong_desc(connections=[(0, 1, 1.5)]))


def test_all_problems_reported_together():
    bad = NetworkDescriptor((PopulationSpec(0), PopulationSpec(5)),
                            (ConnectivitySpec(0, 3, -0.1), ConnectivitySpec(1, 1, 0.5),
                             ConnectivitySpec(1, 1, 0.2)), dt=0, delay=0)
    with pytest.raises(DescriptorError) as info:
        validate(bad)
    text = " | ".join(info.value.problems)
    for needle in ("empty", "does not exist", "probability", "declared twice", "dt must", "delay"):
        assert needle in text


def test_no_populations():
    with pytest.raises(DescriptorError):
        validate(NetworkDescriptor(()))


@pytest.mark.parametrize("sizes,pop,expected", [
    ([100, 100], 0, (0, 100)),
    ([100, 100], 1, (100, 200)),
    ([4000], 0, (0, 4000)),
    ([3, 5, 7], 2, (8, 15)),
])
def test_global_id_range(sizes, pop, expected):
    assert global_id_range(NetworkDescriptor.create(sizes), pop) == expected


def test_global_id_range_invalid():
    with pytest.raises(IndexError):
        global_id_range(NetworkDescriptor.create([10]), 1)


def test_parse_roundtrip(tmp_path):
    desc = pingpong_desc(dt=0.1, delay=8)
    text = format_descriptor(desc)
    assert parse_descriptor(text) == desc
    path = tmp_path / "net.cfg"
    path.write_text("# comment\n" + text + "unknown = 3\n")
    assert load_descriptor(path) == desc


def test_parse_errors():
    with pytest.raises(DescriptorError, match="line 1"):
        parse_descriptor("just words")
    with pytest.raises(DescriptorError, match="line 2"):
        parse_descriptor("populations = 1\nconnect = 0 0\n")


def test_load_validates(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("populations = 10\ndelay = 0\n")
    with pytest.raises(DescriptorError):
        load_descriptor(path)
