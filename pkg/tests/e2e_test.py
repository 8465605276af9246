import os
import subprocess
import sys

import pytest

OUT_DIR = os.environ.get('EQUISTREAM_E2E_DIR', './e2e_out')


def common_body(cmd_line):
    with subprocess.Popen(
        cmd_line,
        stdin=subprocess.PIPE,
        stderr=sys.stderr,
        close_fds=True,
        stdout=sys.stdout,
        universal_newlines=True,
        shell=True,
        bufsize=1,
    ) as cmd:
        cmd.communicate()
        assert cmd.returncode == 0, f'real exit code is {cmd.returncode}'


def setup_module(module):
    os.makedirs(OUT_DIR, exist_ok=True)


@pytest.mark.P0
def test_verify_fast_suites():
    common_body(f'{sys.executable} -m equistream verify --suite so3 --suite pole-sparsity --suite eaas --draws 500')


@pytest.mark.P0
def test_dump_conventions():
    common_body(f'{sys.executable} -m equistream dump-conventions --out {OUT_DIR}/conventions.toml')


@pytest.mark.P0
def test_gen_system():
    common_body(f'{sys.executable} -m equistream gen-system --n 2048 --seed 0 --out {OUT_DIR}/fcc_2048.npz')


@pytest.mark.P1
def test_bench_attn_small_sweep():
    common_body(
        f'{sys.executable} -m equistream bench-attn --sweep-n 128,512 --k 16 --iters 3 --warmup 1 '
        f'--out {OUT_DIR}/attn.csv'
    )


@pytest.mark.P1
def test_bench_tp():
    common_body(f'{sys.executable} -m equistream bench-tp --sweep-n 1,64 --iters 2 --out {OUT_DIR}/tp.csv')


@pytest.mark.P2
def test_verify_all_suites():
    common_body(f'{sys.executable} -m equistream verify')
