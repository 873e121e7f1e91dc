import numpy as np, itertools

def wf(d, budget):
    # water-fill threshold: max over sorted-prefix means (exact)
    d = np.asarray(d, float)
    if budget == 0: return d.max()
    s = np.sort(d)[::-1]
    cs = np.cumsum(s)
    k = np.arange(1, len(d)+1)
    return ((cs - budget)/k).max()

def offline_peak(d, c, rate=None):
    d = np.asarray(d, float)
    v = wf(d, c)
    M = 0.0 if rate is None else max(0.0, (d - rate - v).max())
    sched = np.clip(d - M - v, 0, None)
    return (d - sched).max(), v, sched

# --- Appendix F ---
dhat = np.array([379.5,411,411,442.5,442.5,600,600,600,600,600])
print("sum dhat:", dhat.sum())
p,v,s = offline_peak(dhat, 630)
print("AppF offline: v=",v,"peak=",p,"sched=",s)
d1ref = np.array([379.5]+[300]*9)
print("v(d^1) =", wf(d1ref, 630))

# grid oracle: c=6, rate=3, d=[10,2,2] over feasible schedules at 0.01
d = np.array([10.,2,2]); c=6; rate=3
best = None
g = np.arange(0, 3.0001, 0.01)
for a in g:
    for b in np.arange(0, 2.0001, 0.01):
        for e in np.arange(0, 2.0001, 0.01):
            if a+b+e <= c+1e-12:
                pk = max(10-a, 2-b, 2-e)
                if best is None or pk < best[0]: best = (pk,a,b,e)
print("grid oracle (c=6,rate=3,d=[10,2,2]):", best)
print("prop3.1:", offline_peak(d, c, rate))

# T=2 instance c=1 bounds [1,2]: CR-Compute oracles via Lemma 4.9 ratio grid
c=1.0; dl, du = 1.0, 2.0
xs = np.arange(dl, du+1e-9, 0.001)
# I = {1}: ratio (d1 - c)/v(d^1), d^1=[d1, dl]
r1 = (xs - c)/np.array([wf([x, dl], c) for x in xs])
print("I={1} max:", r1.max(), "at", xs[r1.argmax()])
# I = {1,2}: (d1+d2-c)/(v(d^1)+v(d^2))
best = (0,None)
for x1 in np.arange(dl, du+1e-9, 0.005):
    v1 = wf([x1, dl], c)
    for x2 in np.arange(dl, du+1e-9, 0.005):
        v2 = wf([x1, x2], c)
        r = (x1+x2-c)/(v1+v2)
        if r > best[0]: best = (r,(x1,x2))
print("I={1,2} max:", best)

# phi brute force c=1 T=2
def phi(pi, h=0.05):
    vals = np.arange(dl, du+1e-9, h)
    best = 0
    for prof in itertools.product(vals, repeat=2):
        tot = 0
        for t in range(1,3):
            ref = list(prof[:t]) + [dl]*(2-t)
            v = wf(ref, c)
            tot += max(0.0, prof[t-1] - pi*v)
        best = max(best, tot)
    return best
print("phi(1) =", phi(1.0), " phi(4/3) =", phi(4/3))
