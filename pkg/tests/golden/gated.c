/* AOC model of gated: 7 signals, 3 elements */
/* word width 64; gated evaluation; 1 partition(s) per pass at most */
/* Signal-class extension point (not generated): a multi-valued signal
 * class would replace direct computations by conversion functions such as
 *   void AND(sig *y, const sig *a, const sig *b);
 *   void OR(sig *y, const sig *a, const sig *b);
 *   void ADD(sig *y, const sig *a, const sig *b);
 *   void MUX(sig *y, const sig *sel, const sig *a, const sig *b);
 * with one function per operator row.  Only 2-value words are emitted. */


#include <stdint.h>
#include <string.h>

typedef uint64_t word;
#define CW 64

static void aw_zero(word *r, int n) { for (int i = 0; i < n; i++) r[i] = 0; }
static void aw_set1(word *r, int n, word x) { aw_zero(r, n); r[0] = x; }
static void aw_copy(word *r, int n, const word *a, int an) {
    for (int i = 0; i < n; i++) r[i] = i < an ? a[i] : 0;
}
static void aw_mask(word *r, int n, long width) {
    for (int i = 0; i < n; i++) {
        long lo = (long)i * CW;
        if (lo >= width) r[i] = 0;
        else if (width - lo < CW) r[i] &= (((word)1) << (width - lo)) - 1;
    }
}
static void aw_and(word *r, const word *a, const word *b, int n) { for (int i = 0; i < n; i++) r[i] = a[i] & b[i]; }
static void aw_or(word *r, const word *a, const word *b, int n) { for (int i = 0; i < n; i++) r[i] = a[i] | b[i]; }
static void aw_xor(word *r, const word *a, const word *b, int n) { for (int i = 0; i < n; i++) r[i] = a[i] ^ b[i]; }
static void aw_not(word *r, const word *a, int n) { for (int i = 0; i < n; i++) r[i] = ~a[i]; }
static void aw_add(word *r, const word *a, const word *b, int n) {
    word c = 0;
    for (int i = 0; i < n; i++) {
        word s = a[i] + c;
        word c1 = s < c;
        s += b[i];
        c1 |= s < b[i];
        r[i] = s;
        c = c1;
    }
}
static void aw_sub(word *r, const word *a, const word *b, int n) {
    word br = 0;
    for (int i = 0; i < n; i++) {
        word d = a[i] - b[i];
        word b1 = a[i] < b[i];
        word d2 = d - br;
        b1 |= d < br;
        r[i] = d2;
        br = b1;
    }
}
static void aw_neg(word *r, const word *a, int n) {
    word z[n];
    aw_zero(z, n);
    aw_sub(r, z, a, n);
}
static int aw_iszero(const word *a, int n) {
    for (int i = 0; i < n; i++) if (a[i]) return 0;
    return 1;
}
static int aw_cmp(const word *a, const word *b, int n) {
    for (int i = n - 1; i >= 0; i--)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}
static void aw_shl(word *r, const word *a, int n, unsigned long sh) {
    unsigned long ws = sh / CW, bs = sh % CW;
    for (int i = n - 1; i >= 0; i--) {
        word v = 0;
        long j = (long)i - (long)ws;
        if (j >= 0) {
            v = a[j] << bs;
            if (bs && j - 1 >= 0) v |= a[j - 1] >> (CW - bs);
        }
        r[i] = v;
    }
}
static void aw_shr(word *r, const word *a, int n, unsigned long sh) {
    unsigned long ws = sh / CW, bs = sh % CW;
    for (int i = 0; i < n; i++) {
        word v = 0;
        unsigned long j = (unsigned long)i + ws;
        if (j < (unsigned long)n) {
            v = a[j] >> bs;
            if (bs && j + 1 < (unsigned long)n) v |= a[j + 1] << (CW - bs);
        }
        r[i] = v;
    }
}
static unsigned long aw_to_index(const word *a, int n, unsigned long limit) {
    for (int i = 1; i < n; i++) if (a[i]) return limit;
    return a[0] < limit ? (unsigned long)a[0] : limit;
}
static void aw_mul(word *r, const word *a, const word *b, int n) {
    word acc[n], t[n];
    aw_zero(acc, n);
    for (long k = 0; k < (long)n * CW; k++) {
        if ((b[k / CW] >> (k % CW)) & 1) {
            aw_shl(t, a, n, (unsigned long)k);
            aw_add(acc, acc, t, n);
        }
    }
    aw_copy(r, n, acc, n);
}
static void aw_divmod(word *q, word *rem, const word *a, const word *b, int n) {
    word qq[n], rr[n];
    aw_zero(qq, n);
    aw_zero(rr, n);
    if (!aw_iszero(b, n)) {
        for (long k = (long)n * CW - 1; k >= 0; k--) {
            aw_shl(rr, rr, n, 1);
            rr[0] |= (a[k / CW] >> (k % CW)) & 1;
            if (aw_cmp(rr, b, n) >= 0) {
                aw_sub(rr, rr, b, n);
                qq[k / CW] |= ((word)1) << (k % CW);
            }
        }
    }
    if (q) aw_copy(q, n, qq, n);
    if (rem) aw_copy(rem, n, rr, n);
}
static int aw_parity(const word *a, int n) {
    int p = 0;
    for (int i = 0; i < n; i++) p ^= __builtin_parityll((unsigned long long)a[i]);
    return p;
}
static int aw_allones(const word *a, int n, long width) {
    word t[n];
    aw_copy(t, n, a, n);
    aw_not(t, t, n);
    aw_mask(t, n, width);
    return aw_iszero(t, n);
}
static word aw_extract(const word *a, int n, unsigned long lo, int width) {
    unsigned long ws = lo / CW, bs = lo % CW;
    if (ws >= (unsigned long)n) return 0;
    word v = a[ws] >> bs;
    if (bs && ws + 1 < (unsigned long)n) v |= a[ws + 1] << (CW - bs);
    if (width < CW) v &= (((word)1) << width) - 1;
    return v;
}
static void aw_insert(word *r, int n, unsigned long lo, const word *v, long width) {
    for (long k = 0; k < width; k++) {
        unsigned long pos = lo + (unsigned long)k;
        if (pos >= (unsigned long)n * CW) break;
        word bit = (v[k / CW] >> (k % CW)) & 1;
        r[pos / CW] = (r[pos / CW] & ~(((word)1) << (pos % CW))) | (bit << (pos % CW));
    }
}
static void aw_pack(word *r, int n, const word *m, int depth, int ew) {
    aw_zero(r, n);
    for (int i = 0; i < depth; i++) aw_insert(r, n, (unsigned long)i * ew, &m[i], ew);
}
static void aw_unpack(word *m, int depth, int ew, const word *a, int n) {
    for (int i = 0; i < depth; i++) m[i] = aw_extract(a, n, (unsigned long)i * ew, ew);
}

static int lab_eq(const word *a, int n, const word *b) { return aw_cmp(a, b, n) == 0; }

/* state block */
word S[5];
static word P[2];
static unsigned char pend[2];
static unsigned char act[3];
unsigned long aoc_elements, aoc_groups;
int aoc_error;

/* name mangling: shared signals */
#define gated_clk S[0]
#define gated_en S[1]
#define gated_q S[2]
#define gated_free S[3]

typedef struct { const char *name; int kind; int width; int depth; int cat; int off; int words; } aoc_signal;
const aoc_signal aoc_signals[4] = {
    {"gated_clk", 0, 1, 1, 0, 0, 1},
    {"gated_en", 0, 1, 1, 0, 1, 1},
    {"gated_q", 2, 8, 1, 0, 2, 1},
    {"gated_free", 2, 8, 1, 0, 3, 1},
};
const int aoc_n_signals = 4;

static word W0_0[1];
#define gated_gclk W0_0[0]
static void blk_0_0(word *st) {
    if (act[0]) {
        act[0] = 0; st[0] += 1; st[1] += 1;
        /* comb */
        { word x;
            x = gated_clk & gated_en;
            if (x != gated_gclk) { gated_gclk = x; }
            S[4] = x;
        }
    }
}
#undef gated_gclk

static void blk_1_0(word *st) {
    if (act[1]) {
        act[1] = 0; st[0] += 1; st[1] += 1;
        { /* math: gated_free */
            word x;
            x = (gated_free + 0x3ULL) & 0xffULL;
            if (x != gated_free) { gated_free = x; act[1] = 1; }
        }
    }
}

static void blk_2_0(word *st) {
    if (act[2]) {
        act[2] = 0; st[0] += 1; st[1] += 1;
        { /* math: gated_q */
            word x;
            x = (gated_q + 0x1ULL) & 0xffULL;
            if (x != gated_q) { gated_q = x; act[2] = 1; }
        }
    }
}

static void mark(int sid) {
    switch (sid) {
    case 0: act[0] = 1; break;
    case 1: act[0] = 1; break;
    case 2: act[2] = 1; break;
    case 3: act[1] = 1; break;
    default: break;
    }
}

static void commit_1(void) {
}

static void commit_2(void) {
}

static void commit_late(void) {
}

#ifdef AOC_THREADS
#include <pthread.h>
static pthread_barrier_t bar_start, bar_done;
static void (*volatile task[1])(word *);
static int n_task;
static word task_st[1][2];
static int n_workers;
static void *worker(void *arg) {
    long k = (long)arg;
    for (;;) {
        pthread_barrier_wait(&bar_start);
        if (k < n_task && task[k]) task[k](task_st[k]);
        pthread_barrier_wait(&bar_done);
    }
    return 0;
}
static void run_blocks(void (**fns)(word *), int n) {
    if (n < 2 || n_workers == 0) { for (int i = 0; i < n; i++) { word st[2] = {0, 0}; fns[i](st); aoc_elements += st[0]; aoc_groups += st[1]; } return; }
    n_task = n;
    for (int i = 0; i < n; i++) { task[i] = i ? fns[i] : 0; task_st[i][0] = task_st[i][1] = 0; }
    pthread_barrier_wait(&bar_start);
    fns[0](task_st[0]);
    pthread_barrier_wait(&bar_done);
    for (int i = 0; i < n; i++) { aoc_elements += task_st[i][0]; aoc_groups += task_st[i][1]; }
}
#else
static void run_blocks(void (**fns)(word *), int n) {
    for (int i = 0; i < n; i++) { word st[2] = {0, 0}; fns[i](st); aoc_elements += st[0]; aoc_groups += st[1]; }
}
#endif

static void pass_0(void) { /* OD */
    static void (*fns[1])(word *) = {blk_0_0};
    run_blocks(fns, 1);
}

static void pass_1(void) { /* gated_clk:posedge */
    static void (*fns[1])(word *) = {blk_1_0};
    run_blocks(fns, 1);
    commit_1();
}

static void pass_2(void) { /* gated_gclk:posedge */
    static void (*fns[1])(word *) = {blk_2_0};
    run_blocks(fns, 1);
    commit_2();
}

static word prev_root[2];

/* cycle function: output pass, then edge iterations */
int model_step(void) {
    pass_0();
    for (int it = 0; it < 16; it++) {
        int fired = 0;
        word cur0 = (gated_clk & 1);
        word cur1 = (S[4] & 1);
        int e1 = prev_root[0] != cur0 && cur0 == 1;
        fired |= e1;
        int e2 = prev_root[1] != cur1 && cur1 == 1;
        fired |= e2;
        prev_root[0] = cur0;
        prev_root[1] = cur1;
        if (!fired) return 0;
        if (e1) pass_1();
        if (e2) pass_2();
        commit_late();
        pass_0();
    }
    aoc_error = 1;
    return -1;
}

/* stimulus hook: set an input from little-endian words */
void model_set_input(int index, const word *value) {
    const aoc_signal *s = &aoc_signals[index];
    word t[s->words];
    if (s->cat == 2) aw_unpack(t, s->depth, s->width / s->depth, value, (s->width + CW - 1) / CW);
    else { aw_copy(t, s->words, value, s->words); aw_mask(t, s->words, s->width); }
    if (memcmp(&S[s->off], t, sizeof(word) * s->words)) {
        memcpy(&S[s->off], t, sizeof(word) * s->words);
        switch (index) {
        case 0: mark(0); break;
        case 1: mark(1); break;
        default: break;
        }
    }
}

/* value of a table signal as little-endian words (memories are serialized) */
void model_get(int index, word *out, int n) {
    const aoc_signal *s = &aoc_signals[index];
    if (s->cat == 2) aw_pack(out, n, &S[s->off], s->depth, s->width / s->depth);
    else aw_copy(out, n, &S[s->off], s->words);
}

void model_init(void) {
    memset(act, 1, sizeof(act));
    (void)P; (void)pend;
#ifdef AOC_THREADS
    n_workers = 0;
    if (n_workers > 0) {
        pthread_barrier_init(&bar_start, 0, n_workers + 1);
        pthread_barrier_init(&bar_done, 0, n_workers + 1);
        for (long k = 1; k <= n_workers; k++) { pthread_t t; pthread_create(&t, 0, worker, (void *)k); pthread_detach(t); }
    }
#endif
    pass_0();
    prev_root[0] = (gated_clk & 1);
    prev_root[1] = (S[4] & 1);
    aoc_elements = aoc_groups = 0;
}
