#include "otml/exact_transport.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

using namespace otml;

namespace {

struct LpCase {
  int n, m;
  std::vector<double> w, wt, D;
  double cost;
};

// frozen transportation-LP instances: {n, m, w, wt, D(row-major), optimal_cost}
static const std::vector<LpCase> kLpCases = {
  {2, 3, {0.27198466371062008,0.72801533628937976},
   {0.68076117747144749,0.17903938051608048,0.140199442012472},
   {1.4364508204619291,1.778170413495717,1.906056387289069,1.8367977077120878,1.2608936528191959,0.99373710812000526},
   1.5066033633455276},
  {3, 3, {0.33333333333333331,0.33333333333333331,0.33333333333333331},
   {0.33333333333333331,0.33333333333333331,0.33333333333333331},
   {0.04890674288141228,0.89456938716033574,0.16402612771458136,0.53887868422832841,0.027828518634479771,0.61491577696680755,0.62491572529158124,0.19677176295250853,0.10979889211946381},
   0.062178051211785282},
  {4, 5, {0.3311656107879955,0.17361005610921529,0.060653983415905832,0.43457034968688335},
   {0.22784465994784794,0.23453354925582148,0.27843854281193464,0.19370632201800936,0.065476925966386545},
   {0.14496410127252424,0.76555775860820174,0.89168237788829929,0.97282174036130842,0.96767763200636658,0.051487607972247162,0.3280635667666979,0.059938707513886857,0.24534388108934091,0.53114644579131087,0.7247862162305978,0.87022666775305713,0.59311744280509093,0.8122328737262009,0.094570091986544758,0.52768594058038454,0.10047344997703767,0.20158286567789352,0.36920690230892306,0.17239746194696004},
   0.22858256628151599},
  {5, 4, {0.20000000000000001,0.20000000000000001,0.20000000000000001,0.20000000000000001,0.20000000000000001},
   {0.25,0.25,0.25,0.25},
   {1.133124481903754,1.9666116242759717,1.7485174988031631,1.9260722041836051,0.30617564656920021,1.2088046891665809,1.918785237607497,1.0634797529440947,0.87975592061407426,0.055284127863065385,0.52260394478864325,0.12975003545434546,1.0691185589689198,0.088860107452409035,0.40354180189908023,0.20288066647994579,0.65464719338064703,0.051927263104088579,0.37104824713783235,0.036154100521586657},
   0.45142011022114559},
  {7, 6, {0.12084973948106731,0.15382411939264848,0.046488005522087775,0.14656512955477488,0.073317262255512439,0.22338367333278178,0.23557207046112741},
   {0.25332814536377296,0.099665831078569939,0.1898379173419045,0.21312460550094106,0.086532100888074406,0.15751139982673709},
   {0.12525677580290306,0.29680438888186822,0.39046022592344887,0.33709809665611901,0.94903485615701211,0.0022687673178524159,0.047245023841893996,0.11783915242890863,0.81233358167877545,0.57556704039433981,0.47595847865971086,0.48119383724017539,0.94340776047298802,0.51001823103241106,0.37488118068505583,0.11622028333814682,0.056098924215712609,0.36370485386078322,0.16405389276920257,0.39993615317781372,0.80727400241579039,0.054169150951632439,0.15223429018573964,0.18305027269486118,0.88864153507509946,0.14083814135422967,0.97793694240939355,0.099750082349533753,0.94613030769557926,0.76468020144302828,0.83240001741056224,0.3999895554191425,0.32720653378675268,0.68286590994014318,0.19758579042606939,0.90531248035514855,0.72594370346703285,0.5684416688276317,0.21194098642921766,0.55729327244819993,0.39129143912180298,0.55379360486184492},
   0.18669701011424814},
  {8, 8, {0.125,0.125,0.125,0.125,0.125,0.125,0.125,0.125},
   {0.125,0.125,0.125,0.125,0.125,0.125,0.125,0.125},
   {0.11336975372718328,0.20965656058272508,0.089183170750582685,0.32259799275294376,0.28695128506845902,0.89482250705118149,0.31839072575795502,0.14608561726766656,0.27626384150499694,0.98373067692860416,0.43795011651275084,0.13970928453694431,0.63626234658915115,0.94583814156019108,0.34365401576700716,0.037295062136255552,0.66614226880471528,0.21381170403840721,0.94678019915294498,0.29059164780529589,0.0099001236265857662,0.012594805054339409,0.2300082531047809,0.86901860855937751,0.43330548417882675,0.4203013781032735,0.37173509505878954,0.16637916019061094,0.42812403956333478,0.93584932942813259,0.094649617645507278,0.57938846492382268,0.52417263459204422,0.57672476573224596,0.048466376034251857,0.09659483233102828,0.5407667518266821,0.70362863121939212,0.95905302143165416,0.30453838120112375,0.95210080622112891,0.013309373145849013,0.23226763118024074,0.079369209312498912,0.36198168892563687,0.0018583009294896868,0.50348526566966134,0.86082266502661453,0.65052659330908857,0.73423241465564626,0.83810065203904471,0.13027980636649084,0.28878624436979483,0.060859881614982236,0.082467962197278921,0.29125814711166276,0.46073457768887149,0.26539995255090898,0.3627397047322416,0.14904407152448318,0.38965532520135016,0.50114619802188376,0.1882628099278203,0.23743870184592586},
   0.06586178243188727},
  {10, 10, {0.17719249777043927,0.05415713529831339,0.093510864198817295,0.15009328349288092,0.059022407603933597,0.1846229473077847,0.034625412083047702,0.029921937427199889,0.1256398786120925,0.091213636205490792},
   {0.11960129806450444,0.10875453703973903,0.070672497353815839,0.066021624165365361,0.099419942896933899,0.099526000998802516,0.16258038282692172,0.12977095750906423,0.083250546279462073,0.060402212865390693},
   {0.42573357541722545,1.2670278359184053,1.9641928973284266,1.2941078947318831,0.50026752383485584,1.7080016544121701,0.55340841942623809,1.5583895499246094,1.5091884233673081,1.9035739184857721,1.0901716257763243,1.0513270016112009,1.6959544776054589,1.317383076068432,0.71263137984287384,0.77922876690621679,0.75968060706457274,1.6895023712824646,0.54256753760149612,1.1838852493569199,0.47417144358136537,0.89227161781448583,1.9682334200453409,1.6201538969866118,0.28738714846932145,1.3348100709834265,0.33309947635174902,1.8782097043766774,1.1033333531879239,1.5714386500554469,0.92606478110168045,0.7687014988194032,1.6832849442894497,1.5620958966890042,0.4968410232725804,0.74517899120006925,0.53252006434103349,1.8458892307461183,0.52250626053816385,1.0700336025152544,1.9906375713359181,1.3154567562607244,0.4181588991801421,0.38570620694164287,1.7915824747278684,0.1882992858646747,1.7861014240165602,0.50421207901261778,0.23016205024663888,0.3816890166441026,1.8757228797402341,0.96280151956137261,0.25861856688780638,0.61247463763476628,1.6221688777966103,0.068394737764578106,1.595618489779802,0.58580245780360773,0.15910913535049853,0.13372186857062487,1.601078706519157,1.777888245760221,0.46095941052387035,0.020072989080400398,1.9267871602680005,1.0391490040412881,1.9256135683855287,0.044158919747815786,1.1610234249801761,1.0379441022913201,1.2299563193320242,0.25920371768259487,0.33185911328827805,1.2850240485571089,0.95818669236448328,0.24882370964219244,0.90425501414381881,0.99883979908065856,0.38018446139972673,0.048419241931753509,1.0041127160439922,1.4672789421858738,1.8256905359438038,1.0270578086771058,0.87189942389403718,1.2029928114175943,0.93485020506675753,1.4583116124818747,0.96463664711463937,1.6150815713120332,0.42575973940918632,0.70114527996419207,0.69224479338206057,1.1184367334710765,0.79247872845007516,1.5163089819465614,0.75242760840885659,0.73169887646690279,1.6931664599049019,1.0744983308902538},
   0.47809797044836777},
  {12, 9, {0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329,0.083333333333333329},
   {0.1111111111111111,0.1111111111111111,0.1111111111111111,0.1111111111111111,0.1111111111111111,0.1111111111111111,0.1111111111111111,0.1111111111111111,0.1111111111111111},
   {0.20110379475248519,0.85033925620169803,0.84920780063272505,0.37297587054970349,0.39134231450053658,0.37798521283797859,0.061486402033293031,0.85908392702430614,0.78026628214491989,0.11864309060592693,0.80329344324112772,0.31140185540796073,0.21242003474734472,0.016423417416447261,0.25300121913562823,0.70687926548888447,0.41049408519146502,0.53746804144745464,0.43574260346016869,0.43627684482115014,0.53016716295507815,0.54803991428161813,0.4188834015080577,0.66534055201777498,0.26220043535724036,0.91959696261302215,0.56945128429910541,0.7927097909050983,0.085549717424039606,0.41777275817163495,0.30264595659959259,0.39974667990812818,0.77544447755164203,0.10572381013815824,0.092774325733193441,0.58386938932221222,0.84938344737239901,0.4608599896137614,0.8944674450915131,0.85776945933157833,0.14827862049239715,0.92939750710071622,0.41066304444425616,0.1246604271682199,0.0869692919648688,0.26543136317171423,0.61436990775831857,0.51551850852148551,0.01177261236034044,0.33454311898090205,0.20617867277360591,0.78484177633089891,0.37537751602770431,0.63678723588558572,0.80505895198639321,0.90816347766191297,0.045329588952689015,0.79324505023400016,0.78454905901915839,0.22038772355760361,0.65633138174432293,0.60872090610891061,0.073847729816200247,0.18538873702109826,0.72481884049620671,0.25691557664072373,0.0089442353253442741,0.098520279593892868,0.80863965087364786,0.25142794438284444,0.89364693453514898,0.69003419721044734,0.17142281795595005,0.85814852028353805,0.26517359707471777,0.98788690383974531,0.036894401004071709,0.22033562108006488,0.76793896655508742,0.17647133737463383,0.013311512938323222,0.14557929516071999,0.81200406384879964,0.36818710445956337,0.65554529698034802,0.95642530929487513,0.94580339885797327,0.3956306396802316,0.21702388188948707,0.39360710024619605,0.66068398231934911,0.88943227713111339,0.69206765974085971,0.099947030294366357,0.17227949124864517,0.22226501502584695,0.052066854452329281,0.84503462492627657,0.016692571499629216,0.56193960750187666,0.21469881910836452,0.49558684432973943,0.30037327771456235,0.19586251319303249,0.74074266912292963,0.06645831010063874,0.68350131941982373,0.41699686220217091},
   0.11710768152288249},
  {20, 20, {0.059259820460761621,0.050533704107978819,0.015824530244794986,0.017482644635897233,0.055811763027235756,0.027062283382810907,0.05893045546204724,0.052611584189053831,0.071206209493521952,0.030877508011011183,0.058758428210006479,0.071803431655166547,0.037680047042503217,0.063605292512831882,0.03025758506255596,0.044840872524647413,0.085725592700681974,0.01882982437260845,0.074117859461431415,0.074780563442453152},
   {0.024392061687357074,0.033750302010122385,0.066944540657510473,0.071687017390343041,0.018878678078762975,0.04539263132172288,0.040815227003045962,0.024956050696282515,0.062981996718252262,0.021238286309279288,0.035056331346779317,0.039192308344692429,0.067722337517176934,0.059743097520131141,0.065767564427551037,0.05892990716323207,0.056885588511596183,0.085878373288822446,0.052127326711800946,0.067660373295538756},
   {0.75977113539105867,0.70728846294552583,0.98758579605258445,0.8933094340629516,0.42216296958523092,0.40052679847912465,0.63195873514272449,0.85825634628185243,0.48575751897336872,0.15687853788388884,0.48208832413689739,0.95191213232932448,0.28637088293315283,0.67901880946137494,0.57121024620194605,0.9141837870107099,0.62730716382722129,0.51198276556275102,0.57853616475597536,0.42487188100393225,0.69921710826993766,0.89687925693077297,0.82618335931233267,0.31533181626151963,0.16700258588232098,0.29547641967138916,0.052465895327312606,0.095708649558644443,0.45171694320762001,0.26168589350681837,0.91909646946556633,0.22892282126944818,0.57746116488215182,0.59869535970484711,0.16180286746811323,0.022168960820540873,0.24535311948822647,0.11995797711811729,0.50689130017608064,0.8150729915711159,0.70704239670723001,0.64151045531518158,0.11884419547200598,0.25883732481924282,0.060644931348584841,0.72298715235188227,0.95288300423605909,0.83853605754163629,0.30392499500580716,0.52749375456774761,0.369933097299875,0.5549242086726619,0.16372342701542897,0.25577672949480268,0.31249590860053278,0.090899004619352186,0.33443549641669457,0.45125779977282776,0.36081972762252712,0.069787128062020143,0.048267360224478084,0.35394764710311155,0.67003435952288426,0.79022345932451432,0.75743523261062951,0.14423302198329691,0.68421438668459533,0.67464211765718618,0.55267356308853144,0.76911020598683144,0.91010248479376754,0.44659917944401251,0.43562746456326584,0.22021481827580547,0.89245304271585202,0.39846726114182007,0.96320317911657782,0.26046549821154508,0.41108835129171772,0.83223354354313606,0.97989396823950037,0.51624526818824001,0.56703862861844478,0.93903795363216946,0.51267896817537917,0.34305653689775117,0.6532807888435731,0.38034913906061485,0.10564852385205947,0.78987052546900383,0.36072853632498292,0.7404049375101619,0.45761475476566038,0.82602331124910178,0.94776062803468197,0.97141128865785686,0.43344531080956306,0.64117225574330383,0.16412422945844063,0.3879543469911757,0.4441276474655097,0.18355926046002213,0.91305212575748307,0.72353984387966608,0.88109482642214554,0.86975097292996539,0.93486773432715842,0.12948999633666003,0.80198606187301469,0.79368875981010023,0.38935673455076414,0.21823302356397212,0.60615270592027048,0.17350090314119337,0.46726726622247639,0.8481113548997975,0.070054259370665006,0.94845662841907441,0.59401861900347674,0.04095112798567313,0.4439951578963226,0.49601195675833509,0.65111822687875154,0.72445094480995531,0.86211132709327998,0.24078699372515655,0.28522603099578581,0.44753258694754494,0.21205152821761442,0.53096754334240148,0.70854304081949671,0.87198535229188168,0.59669909079386008,0.77707998996284811,0.78095069858867949,0.892528263888271,0.13668292490884337,0.96431879750277039,0.83509042085161278,0.94028971656147498,0.81618940131122808,0.90704500687804535,0.19762358115022238,0.14667252666522224,0.98018325116346017,0.24297245462728712,0.84727689384138571,0.3166003111047303,0.13496842362940742,0.74820313619912249,0.47488897059012125,0.72661960063066411,0.99460515487569456,0.1299459375690688,0.89760465929400035,0.26712108550294889,0.23276025922025323,0.37474089317239256,0.91866135473412103,0.54207795187925001,0.87034585202515558,0.20103970913274793,0.47154297867913464,0.96101826936497947,0.19388176322761386,0.17179181036889468,0.84842494808609314,0.18568940678002743,0.44762757532145581,0.84623377876374728,0.21930917329972155,0.54881529049471567,0.41436895794146611,0.42387224182702266,0.16177726664941205,0.86401968677186047,0.11167516479279516,0.22432101247815717,0.88655158069880902,0.077144917438563776,0.35276267359506563,0.93419069544356781,0.40829808091633246,0.92105445123636953,0.30449840709193443,0.3265399487420525,0.16229996143169423,0.12026161930368051,0.38106813400679496,0.94662323387454483,0.061119230107090972,0.56979656593060779,0.36997192502247422,0.9981179981643632,0.78484896083347999,0.097634886190389736,0.41148311822580341,0.25504934790971712,0.83046612342664949,0.86183985176039968,0.37351284608803981,0.26465124358425962,0.41627691670581279,0.60866313744701472,0.59033763892867297,0.16089306647499135,0.24429370647881943,0.3476693714957676,0.047055874509097539,0.029425588861276553,0.8032131437041633,0.57855381606833267,0.47922735554274365,0.67725155404173243,0.94171299136060438,0.24190149698929342,0.57171664192650429,0.13786916543344596,0.6852342839684108,0.75091499925347693,0.057549663452831523,0.97906740191241115,0.41471383159932296,0.18279660563213662,0.5001916403136859,0.23501016125456597,0.42440217468288732,0.92105084878452059,0.80962623699371061,0.59594935202368882,0.4713407578248574,0.52577172858807797,0.42750730332151232,0.93044356758006941,0.939618046327654,0.21145888821878034,0.14607509226635873,0.49309257385676264,0.89370463337394301,0.41793464689894644,0.23965841988831593,0.7186425431561595,0.61909578074901628,0.50499954025965055,0.14158558663235665,0.9275265450942054,0.085912910621787186,0.16912927448448689,0.91470964284132528,0.8602926286710878,0.38240468712039732,0.55745793808283128,0.63765398456585531,0.47485586991735418,0.67019991673415835,0.58671483073430186,0.31386548436595196,0.49124360264752964,0.019050857634858587,0.14756396278863448,0.63684074732468576,0.074541600735809288,0.032747702157883363,0.88070754656521943,0.44400260326944929,0.46652717447018233,0.37123103928312062,0.067359424478715901,0.076332169228578994,0.30205932583931416,0.29958000105332294,0.093123941352475925,0.89764544635577159,0.60468949550573103,0.63622555122019397,0.47301327248766456,0.65571761220602043,0.28983538497889971,0.88461262655352579,0.70554561661897797,0.75414557735575161,0.86182061664593668,0.87404908180055163,0.10944942454150997,0.6514292371067657,0.49588149981819618,0.3711553869617783,0.4989526369968128,0.57549959831551112,0.39823717145551718,0.59648740219126983,0.5937613176184019,0.71912437973302401,0.64477300530751935,0.78516416620118268,0.85840431189894562,0.78439633701563205,0.69740147069591707,0.90017108414013536,0.71832284161065241,0.89014084666009141,0.29356738197796395,0.042164063003790941,0.051586097126610553,0.65710047019546958,0.44059416415555164,0.90858354053423751,0.88571231576157883,0.479506217245528,0.668855141172634,0.65795972840185568,0.95668396114818877,0.38587466850616359,0.85286923590140051,0.28874645826548628,0.47968002037207447,0.12865327511681468,0.62488090716882816,0.82221673327945111,0.7340852467873723,0.38621043083368822,0.45451695478701448,0.76780904074612144,0.33944064650439587,0.83976504795667928,0.32172469131317982,0.34073154645254822,0.13857376055417037,0.72455575456759158,0.47448794578111209,0.25510066900973993,0.77122040214485377,0.88485701588126886,0.53315031132335755,0.21200160480968444,0.47070976611457571,0.21781109210890759,0.47961599619037587,0.29652016936579906,0.14635087838376126,0.61444916512493475,0.36239047357790843,0.72049884893932903,0.14701857164298116,0.97048984386434367,0.81678428414888393,0.60276227925693926,0.02832309252565135,0.98041058520454916,0.53396139075253368,0.65202603788841518,0.70419973079174158,0.23863276058975347,0.2900654342234581,0.13870204681762577,0.50621875339259692,0.28644563647478793,0.65659059752660898,0.80662813296420022,0.20317384508076397,0.64840223611251113,0.50159148756736338,0.52925683936882784,0.12048680652699362,0.20749104555508346,0.11802593425738506,0.094418475278739367,0.72264364037963347,0.84119445578788421,0.27741790783732634,0.52376239047243145,0.31318073137452263,0.036918945414011084,0.083167018207666699,0.53378806391371469,0.98399360722120599,0.87204190382332891,0.97417969866725684,0.60867855395934511,0.11825290055515092,0.34176656941045758,0.023825058283235223,0.86763674609619534,0.84794754862854937,0.88617850511420304,0.35969779715875771,0.23374527050986782,0.91286019349686853,0.87044076184005181,0.45930220788551945,0.13695570327513085,0.088508919242559769,0.35335456373234275,0.30387428004203498,0.69281603848054529,0.7915066674017226,0.27289714697292711,0.64176299828188643,0.78210101135591481,0.42918426922101893},
   0.11018866373963043},
  {6, 2, {0.16666666666666666,0.16666666666666666,0.16666666666666666,0.16666666666666666,0.16666666666666666,0.16666666666666666},
   {0.5,0.5},
   {0.70124535428006018,1.9831281805435979,1.8401321279471528,0.60419374170025586,0.27242551207936599,1.219327562942587,0.82565271810499052,1.645533294209639,1.0917221966499426,1.4505155494711124,0.96002753084514669,1.7784538277795097},
   0.93874778390254909},
};

DiscreteDistribution dist_from(const std::vector<double>& w) {
  const Index n = Index(w.size());
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = w[std::size_t(i)];
  return make_distribution(Matrix::Zero(n, 1), v);
}

CostMatrix cost_from(int n, int m, const std::vector<double>& D) {
  CostMatrix c;
  c.entries.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) c.entries(i, j) = D[std::size_t(i * m + j)];
  return c;
}

DiscreteDistribution points1d(std::initializer_list<double> xs) {
  Matrix m(Index(xs.size()), 1);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return make_distribution(m);
}

}  // namespace

TEST_CASE("exact_ot matches frozen LP optima and returns feasible plans") {
  for (const LpCase& lp : kLpCases) {
    DiscreteDistribution a = dist_from(lp.w);
    DiscreteDistribution b = dist_from(lp.wt);
    CostMatrix cost = cost_from(lp.n, lp.m, lp.D);
    ExactOtResult res = exact_ot(a, b, cost);
    CHECK(testutil::rel_gap(res.cost, lp.cost) <= 1e-9);
    CHECK(res.plan.coupling.minCoeff() >= -1e-15);
    CHECK(max_marginal_violation(res.plan) <= 1e-10);
    CHECK(transport_cost(res.plan, cost) == doctest::Approx(res.cost).epsilon(1e-12));
  }
}

TEST_CASE("exact_ot hand examples") {
  DiscreteDistribution one = points1d({0.0}), other = points1d({3.0});
  CHECK(exact_ot(one, other, pairwise_cost(one, other, 2.0, 0.5)).cost ==
        doctest::Approx(4.5).epsilon(1e-14));

  DiscreteDistribution a = points1d({0.0, 1.0});
  CHECK(exact_ot(a, a, pairwise_cost(a, a, 2.0, 0.5)).cost == doctest::Approx(0.0));

  DiscreteDistribution b = points1d({3.0, 4.0});
  // identity matching is optimal: (9 + 9) / 2 * 0.5
  CHECK(exact_ot(a, b, pairwise_cost(a, b, 2.0, 0.5)).cost ==
        doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("exact cost never exceeds the entropic sharp cost") {
  Rng rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = Index(2 + rng.below(6)), m = Index(2 + rng.below(6));
    Matrix pa = testutil::unit_rows(n, 3, rng);
    Matrix pb = testutil::unit_rows(m, 3, rng);
    DiscreteDistribution a = make_distribution(pa);
    DiscreteDistribution b = make_distribution(pb);
    CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
    ExactOtResult exact = exact_ot(a, b, cost);
    SinkhornConfig cfg;
    cfg.epsilon = 0.05;
    cfg.max_iterations = 200000;
    cfg.tolerance = 1e-9;
    TransportPlan plan = sinkhorn(a, b, cost, cfg);
    REQUIRE(plan.converged);
    CHECK(exact.cost <= transport_cost(plan, cost) + 1e-9);
  }
}

TEST_CASE("exact_ot validates shapes and refuses oversized instances") {
  DiscreteDistribution a = points1d({0.0, 1.0}), b = points1d({2.0});
  CostMatrix wrong;
  wrong.entries = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(exact_ot(a, b, wrong), std::invalid_argument);

  const Index big = 21;
  DiscreteDistribution ba = make_distribution(Matrix::Random(big, 1));
  DiscreteDistribution bb = make_distribution(Matrix::Random(big, 1));
  CHECK_THROWS_AS(exact_ot(ba, bb, pairwise_cost(ba, bb, 2.0, 0.5)), std::invalid_argument);
}
