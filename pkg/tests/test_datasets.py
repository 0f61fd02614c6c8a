"""
Тесты файлов датасетов и адаптера таблиц BEM
"""
import numpy as np
import pytest

from core.datasets import export_bem_tables, import_bem_tables, load_dataset, save_dataset
from core.exceptions import DataError
from core.hydro_oracle import generate_training_data


@pytest.fixture(scope="module")
def datasets(grid):
    return generate_training_data(grid, n_one=9, n_two=6, seed=2)


def _assert_same(lhs, rhs):
    assert lhs.kind == rhs.kind
    assert lhs.depth == rhs.depth
    assert np.array_equal(lhs.grid.omegas, rhs.grid.omegas)
    assert len(lhs) == len(rhs)
    for r1, r2 in zip(lhs.records, rhs.records):
        assert r1.inputs() == r2.inputs()
        for name in lhs.targets:
            assert np.array_equal(r1.values[name], r2.values[name])


def test_dataset_round_trip_is_lossless(datasets, tmp_path):
    for ds in datasets:
        path = save_dataset(ds, tmp_path / f"{ds.kind}.csv")
        _assert_same(load_dataset(path), ds)


def test_dataset_header_line(datasets, tmp_path):
    path = save_dataset(datasets[0], tmp_path / "one.csv")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first == "# wavefarm-hydro v1 kind=one h=50.0 n_w=12"


def test_truncated_file_names_offending_line(datasets, tmp_path):
    path = save_dataset(datasets[0], tmp_path / "one.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_dataset(path)
    assert info.value.line == len(lines) - 3
    assert "frequency rows" in str(info.value)


def test_mixed_schema_rows_are_rejected(datasets, tmp_path):
    one_path = save_dataset(datasets[0], tmp_path / "one.csv")
    two_path = save_dataset(datasets[1], tmp_path / "two.csv")
    one_lines = one_path.read_text(encoding="utf-8").splitlines()
    two_row = two_path.read_text(encoding="utf-8").splitlines()[2]
    one_lines.insert(5, two_row)
    one_path.write_text("\n".join(one_lines) + "\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_dataset(one_path)
    assert info.value.line == 6
    assert "schema" in str(info.value)


def test_inconsistent_grid_is_rejected(datasets, tmp_path):
    path = save_dataset(datasets[0], tmp_path / "one.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    n_w = datasets[0].grid.n_w
    # сдвигаем частоту во второй записи
    row = lines[2 + n_w].split(",")
    row[3] = repr(float(row[3]) + 1e-3)
    lines[2 + n_w] = ",".join(row)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(DataError, match="frequency grid"):
        load_dataset(path)


def test_malformed_and_missing_files(tmp_path):
    with pytest.raises(DataError):
        load_dataset(tmp_path / "absent.csv")
    path = tmp_path / "bad.csv"
    path.write_text("record,R,D\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_dataset(path)
    assert info.value.line == 1
    path.write_text("# wavefarm-hydro v1 kind=one h=50.0 n_w=1\nrecord,R,D,omega,a,b,fe_re,fe_im\n"
                    "0,1.0,1.0,0.5,x,1,1,1\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_dataset(path)
    assert info.value.line == 3
    path.write_text("# wavefarm-hydro v1 kind=one h=50.0 n_w=1\nrecord,R,D,omega,a,b,fe_re,fe_im\n"
                    "0,1.0,1.0,0.5,nan,1,1,1\n", encoding="utf-8")
    with pytest.raises(DataError, match="non-finite"):
        load_dataset(path)


# ==================== BEM TABLES ====================

def test_bem_export_import_is_identity(datasets, tmp_path):
    for ds in datasets:
        directory = tmp_path / ds.kind
        files = export_bem_tables(ds, directory)
        assert len(files) == len(ds)
        _assert_same(import_bem_tables(directory), ds)


def test_bem_import_skips_solver_headers(tmp_path):
    table = tmp_path / "body.dat"
    table.write_text(
        "# wavefarm-bem kind=one R=2.0 D=1.5 h=50.0\n"
        'TITLE = "heave coefficients"\n'
        'VARIABLES = "w" "A" "B" "Re" "Im"\n'
        "ZONE t=\"body 1\"\n"
        "% solver comment\n"
        "0.5  1000.0  20.0  300.0  -1.0\n"
        "1.0  900.0   40.0  250.0  -2.0\n",
        encoding="utf-8",
    )
    ds = import_bem_tables(tmp_path)
    assert ds.kind == "one" and len(ds) == 1
    assert np.array_equal(ds.grid.omegas, [0.5, 1.0])
    assert np.array_equal(ds.records[0].values["fe_im"], [-1.0, -2.0])


def test_bem_header_only_file_is_empty_dataset(tmp_path):
    (tmp_path / "body.dat").write_text("# wavefarm-bem kind=one R=2.0 D=1.5 h=50.0\n"
                                       "# omega a b fe_re fe_im\n", encoding="utf-8")
    with pytest.raises(DataError, match="empty dataset"):
        import_bem_tables(tmp_path)


def test_bem_non_monotone_omega(tmp_path):
    (tmp_path / "body.dat").write_text("# wavefarm-bem kind=one R=2.0 D=1.5 h=50.0\n"
                                       "1.0 1 1 1 1\n0.5 1 1 1 1\n", encoding="utf-8")
    with pytest.raises(DataError, match="strictly increasing"):
        import_bem_tables(tmp_path)


def test_bem_missing_columns_lists_expectation(tmp_path):
    (tmp_path / "pair.dat").write_text("# wavefarm-bem kind=two R=2.0 D=1.5 d=50 theta=0 h=50.0\n"
                                       "0.5 1 1 1 1\n1.0 1 1 1 1\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        import_bem_tables(tmp_path)
    assert "omega a11 a12 b11 b12 fe_re fe_im" in str(info.value)


def test_bem_mixed_kinds_and_empty_directory(datasets, tmp_path):
    with pytest.raises(DataError):
        import_bem_tables(tmp_path / "missing")
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(DataError, match="empty dataset"):
        import_bem_tables(empty)
    mixed = tmp_path / "mixed"
    export_bem_tables(datasets[0], mixed)
    (mixed / "zz_pair.dat").write_text(
        "# wavefarm-bem kind=two R=2.0 D=1.5 d=50 theta=0 h=50.0\n0.5 1 1 1 1 1 1\n", encoding="utf-8")
    with pytest.raises(DataError, match="mixed"):
        import_bem_tables(mixed)
