"""Reference values frozen into the unit tests.

Every quantity is computed from its defining integral with mpmath at 20 digits,
without reusing any closed form from the C++ library.
"""
import mpmath as mp

mp.mp.dps = 20
inf = mp.inf


def i_beta(beta):
    # t = u^k on [0,1] and t = w^(-m) on [1,inf) remove the t^(1-beta) endpoint singularity,
    # which plain tanh-sinh under-resolves at this precision.
    k = 1 / (2 - beta)
    m = 1 / (beta - 1)
    head = lambda u: k / (4 * (1 + mp.power(u, k) / 2 + mp.sqrt(1 + mp.power(u, k))))
    tail = lambda w: m / (4 * (mp.power(w, m) + mp.mpf(1) / 2 + mp.sqrt(mp.power(w, 2 * m) + mp.power(w, m))))
    return beta * (mp.quad(head, [0, 1]) + mp.quad(tail, [0, 1]))


def exp_pdf(rate):
    return lambda x: rate * mp.exp(-rate * x)


def erlang_pdf(k, nu):
    return lambda x: nu ** k * x ** (k - 1) * mp.exp(-nu * x) / mp.factorial(k - 1)


def hyper_pdf(branches):
    return lambda x: sum(w * mu * mp.exp(-mu * x) for w, mu in branches)


def rho(g1, g2, sf2, y, v):
    conv = mp.quad(lambda u: g1(u) * g2(v + y - u), [0, y])
    return conv / g1(y) - sf2(v)


def exp_k(mu1, mu2, x):
    d = mu1 - mu2
    return mu2 * x if d == 0 else mu2 * (mp.exp(d * x) - 1) / d


def mean_sqrt_xi(theta, r):
    def bracket(x):
        return x - 1 if r == 1 else mp.exp((r - 1) * x) / (r - 1) - r / (r - 1)
    return mp.quad(lambda x: r * mp.exp(-r * x) * mp.sqrt(1 + theta * bracket(x)), [0, 1, 10, 50, inf]) - 1


def c0_exp_exp(lam, mu1, mu2):
    # E[rho^2] with rho = exp(-mu2 v) (K(x) - 1)
    ev = lam / (lam + 2 * mu2)
    ek = mp.quad(lambda x: mu1 * mp.exp(-mu1 * x) * (exp_k(mu1, mu2, x) - 1) ** 2, [0, 1, 10, inf])
    return ev * ek


if __name__ == "__main__":
    class Out(dict):
        def __setitem__(self, k, v):
            print(f"{k}: {mp.nstr(v, 17)}", flush=True)

    out = Out()
    for b in (1.2, 1.5, 1.8):
        out[f"i_beta({b})"] = i_beta(mp.mpf(str(b)))

    # exp/exp, lambda = 0.5
    for mu1, q in ((1, 0.3), (1.5, 0.3), (1, 0.05)):
        g1 = exp_pdf(mu1)
        out[f"mean_sqrt_z YV exp/exp mu1={mu1} mu2=1 lam=0.5 q={q}"] = mp.quad(
            lambda x: mu1 * mp.exp(-mu1 * x) * mp.quad(
                lambda v: mp.mpf(0.5) * mp.exp(-v / 2) * mp.sqrt(1 + q * mp.exp(-v) * (exp_k(mu1, 1, x) - 1)), [0, 2, 10, inf]),
            [0, 1, 10, 40])
    p = mp.mpf(1) / 3
    for q in (0.1, 0.3):
        out[f"mean_sqrt_z YOnly exp/exp mu=1 lam=0.5 q={q}"] = mp.quad(
            lambda x: mp.exp(-x) * mp.sqrt(1 + p * q * (x - 1)), [0, 1, 10, inf])
    q = mp.mpf(0.3)
    out["mean_sqrt_z II_YV exp/exp mu=1 lam=0.5 q=0.3"] = mp.quad(
        lambda x: mp.exp(-x) * mp.quad(lambda v: mp.mpf(0.5) * mp.exp(-v / 2) * mp.sqrt(1 + q * mp.exp(-(1 - q) * v) * (x - 1)), [0, 2, 10, inf]),
        [0, 1, 10, inf])
    c = p * q / (1 - (1 - p) * q)
    out["mean_sqrt_z II_YOnly exp/exp mu=1 lam=0.5 q=0.3"] = mp.quad(lambda x: mp.exp(-x) * mp.sqrt(1 + c * (x - 1)), [0, 1, 10, inf])

    # Erlang g2: g1 = Exp(1), g2 = Erlang(2, 2), lambda = 0.5
    g1 = exp_pdf(1)
    g2 = erlang_pdf(2, 2)
    sf2 = lambda v: mp.exp(-2 * v) * (1 + 2 * v)
    out["rho exp/erlang(2,2) y=1 v=0.3"] = rho(g1, g2, sf2, mp.mpf(1), mp.mpf(0.3))
    out["rho exp/erlang(2,2) y=2.5 v=0"] = rho(g1, g2, sf2, mp.mpf(2.5), mp.mpf(0))
    # int t g2hat(t) dt with g2hat(t) = int lam e^{-lam v} g2(v + t) dv
    lam = mp.mpf(0.5)
    g2hat = lambda t: mp.quad(lambda v: lam * mp.exp(-lam * v) * g2(v + t), [0, 2, 10, inf])
    m = mp.quad(lambda t: t * g2hat(t), [0, 1, 10, inf])
    out["t_w exp/erlang(2,2) lam=0.5 q=0.2 n=1000"] = 1000 / (1 - lam) + lam * mp.mpf(0.2) * 1000 / (1 - lam) * m
    out["g2_hat erlang(2,2) lam=0.5 t=0.7"] = g2hat(mp.mpf(0.7))

    # Hyper-exponential g2, Erlang g1
    br = [(mp.mpf(0.5), mp.mpf(0.6)), (mp.mpf(0.5), mp.mpf(2))]
    g1 = erlang_pdf(2, 1)
    g2 = hyper_pdf(br)
    sf2 = lambda v: sum(w * mp.exp(-mu * v) for w, mu in br)
    out["rho erlang(2,1)/hyper y=1.5 v=0.4"] = rho(g1, g2, sf2, mp.mpf(1.5), mp.mpf(0.4))

    # C0
    out["c0 exp/exp lam=0.5 mu1=1.5 mu2=1"] = c0_exp_exp(mp.mpf(0.5), mp.mpf(1.5), mp.mpf(1))
    out["c0 exp/exp lam=0.5 mu1=0.7 mu2=1"] = c0_exp_exp(mp.mpf(0.5), mp.mpf(0.7), mp.mpf(1))

    # Expansion quadrature
    for theta, r in ((1e-2, 0.5), (1e-3, 3), (1e-2, 1.0), (1e-3, 2.0)):
        out[f"mean_sqrt_xi_dev theta={theta} r={r}"] = mean_sqrt_xi(mp.mpf(theta), mp.mpf(r))

