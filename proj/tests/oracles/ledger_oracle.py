"""Independent encoder for the golden ledger fixtures (hashlib + struct only)."""
import hashlib
import struct
import sys

def H(b):
    return hashlib.sha256(b).digest()

genesis = H(b"genesis" + struct.pack(">Q", 42))

def tx_bytes(owner, recipient, amount, prev, seq, created, attempt):
    return b"\x01" + struct.pack(">IIQ", owner, recipient, amount) + prev + struct.pack(">QQI", seq, created, attempt)

def block_bytes(owner, prev, height, created, attempt, drain, ids):
    out = b"\x02" + struct.pack(">I", owner) + prev + struct.pack(">QQIB", height, created, attempt, drain)
    out += struct.pack(">I", len(ids)) + b"".join(ids)
    return out

tx = tx_bytes(3, 7, 1, genesis, 5, 1234, 0)
tx_id = H(tx)
blk = block_bytes(9, genesis, 1, 2500, 1, 0, [tx_id])
out = sys.argv[1]
open(f"{out}/tx_canonical.bin", "wb").write(tx)
with open(f"{out}/ledger_ids.txt", "w") as f:
    f.write(f"genesis {genesis.hex()}\n")
    f.write(f"tx {tx_id.hex()}\n")
    f.write(f"block {H(blk).hex()}\n")
    f.write(f"token {H(tx_id + struct.pack('>I', 4) + bytes([1])).hex()}\n")
