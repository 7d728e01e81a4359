"""Reference BiLSTM encoding for the fixed-weight case in test_neural.cpp.

Weights follow fill(t, k) = 0.1 * (((7 * k + 3 * t) % 11) - 5) where t is the
tensor's position in parameter order and k the flat index.
"""
import math

V, E, H = 5, 2, 2


def fill(t, n):
    return [0.1 * (((7 * k + 3 * t) % 11) - 5) for k in range(n)]


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def lstm_final(tokens, emb, w_in, w_rec, b):
    h = [0.0] * H
    c = [0.0] * H
    for tok in tokens:
        x = emb[tok * E:(tok + 1) * E]
        pre = []
        for r in range(4 * H):
            s = b[r]
            s += sum(w_in[r * E + j] * x[j] for j in range(E))
            s += sum(w_rec[r * H + j] * h[j] for j in range(H))
            pre.append(s)
        i = [sigmoid(v) for v in pre[0:H]]
        f = [sigmoid(v) for v in pre[H:2 * H]]
        g = [math.tanh(v) for v in pre[2 * H:3 * H]]
        o = [sigmoid(v) for v in pre[3 * H:4 * H]]
        c = [f[k] * c[k] + i[k] * g[k] for k in range(H)]
        h = [o[k] * math.tanh(c[k]) for k in range(H)]
    return h


emb = fill(0, V * E)
lstms = []
t = 1
for _ in range(4):
    lstms.append((fill(t, 4 * H * E), fill(t + 1, 4 * H * H), fill(t + 2, 4 * H)))
    t += 3


def bilstm(tokens, fwd, bwd):
    return lstm_final(tokens, emb, *fwd) + lstm_final(list(reversed(tokens)), emb, *bwd)


title = [2, 3, 4]
desc = [4, 1]
out = bilstm(title, lstms[0], lstms[1]) + bilstm(desc, lstms[2], lstms[3])
print(", ".join(f"{v:.17g}" for v in out))
